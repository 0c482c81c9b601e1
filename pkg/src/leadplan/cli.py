"""Batch entry point: ingest -> link -> partition -> score -> rank/simulate -> serve.

Stages hand off through files (junction.csv, projects.geojson,
projects_scored.csv, ...) so planners can inspect and hand-correct
intermediates between runs. Any toolkit failure exits non-zero with a
single machine-parsable JSON line on stderr.
"""
from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click

from . import ingest, linkage, partition, pipeline, policysim, prioritize, synth
from .errors import LeadPlanError
from .model import PlanConfig, LeadStatusPolicy
from .service import SnapshotStore, create_app


def parse_lead_policy(text: str) -> LeadStatusPolicy:
    """conservative | fixed[:w] | before:<year> | probability"""
    head, _, arg = text.partition(":")
    head = head.strip().lower()
    if head == "conservative":
        return LeadStatusPolicy.conservative()
    if head == "fixed":
        return LeadStatusPolicy.fixed_unknown_weight(float(arg) if arg else 0.5)
    if head == "before":
        return LeadStatusPolicy.assume_lead_if_built_before(int(arg))
    if head == "probability":
        return LeadStatusPolicy.use_probability_field()
    raise click.BadParameter(f"unknown lead policy {text!r}")


def fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LeadPlanError as exc:
            click.echo(json.dumps({"error": exc.code, "detail": str(exc)}), err=True)
            sys.exit(1)
    return wrapper


def _write_rows(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _config(d, k, cap, leave_age, lead_policy, max_segment=150.0, budget=0.0):
    return PlanConfig(
        budget=budget,
        per_line_cost=d,
        fixed_cost=k,
        leave_home_age=leave_age,
        horizon_cap_years=cap,
        lead_policy=parse_lead_policy(lead_policy),
        max_segment_m=max_segment,
    )


@click.group()
def cli():
    """Lead service line replacement planning toolkit."""


@cli.command()
@click.option("--students", required=True, type=click.Path(exists=True))
@click.option("--parcels", required=True, type=click.Path(exists=True))
@click.option("--geocoder", "geocoder_mode", default="mock",
              type=click.Choice(["mock", "cache", "live"]))
@click.option("--threshold", default=linkage.DEFAULT_MATCH_THRESHOLD, type=float)
@click.option("--corrections", type=click.Path(exists=True))
@click.option("--cache", "cache_path", type=click.Path())
@click.option("--live-url", envvar="LEADPLAN_GEOCODER_URL")
@click.option("--api-key", envvar="LEADPLAN_GEOCODER_KEY")
@click.option("--workers", default=1, type=int)
@click.option("--out", "out_dir", default=".", type=click.Path())
@fail_cleanly
def link(students, parcels, geocoder_mode, threshold, corrections, cache_path,
         live_url, api_key, workers, out_dir):
    """Geocode student and parcel addresses into junction.csv + unmatched.csv."""
    students_loaded = ingest.load_students(students)
    parcels_loaded = ingest.load_geo(parcels).parcels
    coder = pipeline.make_geocoder(
        geocoder_mode, parcels=parcels_loaded, cache_path=cache_path,
        live_url=live_url, api_key=api_key,
    )
    records = [("students", c.child_id, c.raw_address) for c in students_loaded.records]
    records += [("parcels", p.parcel_id, p.address.formatted) for p in parcels_loaded]
    junction, unmatched = linkage.build_junction(records, coder, threshold, workers)
    if corrections:
        overrides = ingest.load_corrections(corrections)
        universe = {p.address.place_id for p in parcels_loaded}
        universe.update(e.place_id for e in junction)
        junction = linkage.apply_corrections(junction, overrides, universe)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "junction.csv",
                [["dataset", "source_key", "place_id", "probability", "provenance"]]
                + [[e.source_dataset, e.source_key, e.place_id,
                    repr(e.probability), e.provenance] for e in junction])
    _write_rows(out / "unmatched.csv",
                [["dataset", "source_key", "raw_address", "reason",
                  "best_place_id", "best_probability"]]
                + [[u.source_dataset, u.source_key, u.raw_address, u.reason,
                    u.best_place_id or "", repr(u.best_probability)]
                   for u in unmatched])
    click.echo(f"linked {len(junction)} records, {len(unmatched)} unmatched")


@cli.command("partition")
@click.option("--segments", required=True, type=click.Path(exists=True))
@click.option("--parcels", required=True, type=click.Path(exists=True))
@click.option("--lines", required=True, type=click.Path(exists=True))
@click.option("--max-segment", default=150.0, type=float)
@click.option("--lead-policy", default="conservative")
@click.option("--out", default="projects.geojson", type=click.Path())
@fail_cleanly
def partition_cmd(segments, parcels, lines, max_segment, lead_policy, out):
    """Split centerlines and emit candidate projects as GeoJSON."""
    centerlines = ingest.load_geo(segments).segments
    parcel_list = ingest.load_geo(parcels).parcels
    line_list = ingest.load_service_lines(lines).records
    pieces = partition.split_streets(centerlines, max_segment)
    assigned = partition.assign_parcels(parcel_list, pieces)
    projects = partition.build_projects(
        pieces, assigned.assignment, line_list,
        {p.parcel_id: p for p in parcel_list}, parse_lead_policy(lead_policy),
    )
    features = []
    for p in projects:
        feature = ingest.segment_feature(p.segment)
        feature["properties"].update({
            "project_id": p.project_id,
            "lead_line_count": p.lead_line_count,
            "parcel_ids": sorted(p.parcel_ids),
        })
        features.append(feature)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)
    click.echo(f"wrote {len(projects)} candidate projects to {out}")


@cli.command()
@click.option("--students", required=True, type=click.Path(exists=True))
@click.option("--lines", required=True, type=click.Path(exists=True))
@click.option("--parcels", required=True, type=click.Path(exists=True))
@click.option("--segments", required=True, type=click.Path(exists=True))
@click.option("--corrections", type=click.Path(exists=True))
@click.option("--threshold", default=linkage.DEFAULT_MATCH_THRESHOLD, type=float)
@click.option("--d", default=1.0, type=float, help="cost per lead side")
@click.option("--k", default=0.0, type=float, help="fixed cost per project")
@click.option("--cap", type=float, help="exposure horizon cap, years")
@click.option("--leave-age", default=18.0, type=float)
@click.option("--lead-policy", default="conservative")
@click.option("--max-segment", default=150.0, type=float)
@click.option("--out", default="projects_scored.csv", type=click.Path())
@fail_cleanly
def score(students, lines, parcels, segments, corrections, threshold, d, k, cap,
          leave_age, lead_policy, max_segment, out):
    """Run the full pipeline and write per-project scores."""
    paths = pipeline.SnapshotPaths(
        students=Path(students), lines=Path(lines), parcels=Path(parcels),
        segments=Path(segments),
        corrections=Path(corrections) if corrections else None,
    )
    config = _config(d, k, cap, leave_age, lead_policy, max_segment)
    linked = pipeline.load_snapshot(paths, threshold=threshold)
    if not linked.report.usable:
        fatal = [d_ for d_ in linked.report.defects if d_.fatal]
        raise LeadPlanError(f"snapshot not usable: {len(fatal)} fatal defects, "
                            f"first: {fatal[0].message}")
    plan = pipeline.score_snapshot(linked.snapshot, config)
    ingest.write_scored_projects(out, plan.projects, plan.child_counts)
    click.echo(f"scored {len(plan.projects)} projects to {out}")


@cli.command()
@click.option("--projects-scored", "scored", required=True, type=click.Path(exists=True))
@click.option("--budget", type=float, help="report a greedy selection for this budget")
@click.option("--out", default="ranked.csv", type=click.Path())
@fail_cleanly
def rank(scored, budget, out):
    """Order projects by benefit-cost ratio into ranked.csv."""
    projects, _ = ingest.load_scored_projects(scored)
    ranked = prioritize.rank_projects(projects)
    _write_rows(out, prioritize.ranked_csv_rows(ranked, projects))
    click.echo(f"ranked {len(ranked)} projects to {out}")
    if budget is not None:
        chosen = prioritize.greedy_select(ranked, projects, budget)
        click.echo(
            f"greedy selection under budget {budget}: {len(chosen.selected)} projects, "
            f"value {chosen.total_value:.1f}, cost {chosen.total_cost:.1f}"
        )


@cli.command()
@click.option("--projects-scored", "scored", required=True, type=click.Path(exists=True))
@click.option("--policies", "--policy", "policies",
              default="by_value,by_bcr,uniform_random")
@click.option("--n", type=int)
@click.option("--iterations", default=1, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", default="trajectories.csv", type=click.Path())
@fail_cleanly
def simulate(scored, policies, n, iterations, seed, out):
    """Simulate replacement policies and write cumulative trajectories."""
    projects, child_counts = ingest.load_scored_projects(scored)
    steps = n if n is not None else min(100, len(projects))
    parsed = [policysim.parse_policy(name, seed)
              for name in policies.split(",") if name.strip()]
    outcomes = policysim.simulate(parsed, projects, n=steps,
                                  iterations=iterations, child_counts=child_counts)
    _write_rows(out, policysim.trajectory_csv_rows(outcomes))
    click.echo(f"simulated {len(parsed)} policies over {steps} steps to {out}")


@cli.command("gap-bench")
@click.option("--instances", default=1000, type=int)
@click.option("--max-items", default=15, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", default="gaps.csv", type=click.Path())
@fail_cleanly
def gap_bench(instances, max_items, seed, out):
    """Benchmark greedy-vs-exact value ratios on random instances."""
    import random
    import statistics

    rng = random.Random(f"gap:{seed}")
    gaps = []
    rows = [["instance", "n_items", "budget", "gap"]]
    for i in range(instances):
        projects, budget = synth.random_knapsack_instance(rng, max_items)
        gap = prioritize.approximation_gap(projects, budget)
        gaps.append(gap)
        rows.append([i, len(projects), repr(budget), repr(gap)])
    _write_rows(out, rows)
    click.echo(
        f"{instances} instances: median gap {statistics.median(gaps):.4f}, "
        f"mean {statistics.fmean(gaps):.4f}, min {min(gaps):.4f}"
    )


@cli.command("gen-city")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, type=int)
@click.option("--streets", default=24, type=int)
@click.option("--calibrate-fig3", "calibrated", is_flag=True,
              help="emit the 500-project long-tail regression fixture")
@fail_cleanly
def gen_city(out_dir, seed, streets, calibrated):
    """Write a synthetic city snapshot (students, lines, parcels, segments)."""
    if calibrated:
        city = synth.generate_calibrated_city(seed)
    else:
        city = synth.generate_city(seed, n_streets=streets)
    city.write(out_dir)
    click.echo(
        f"wrote {len(city.centerlines)} streets, {len(city.parcels)} parcels, "
        f"{len(city.children)} students to {out_dir}"
    )


@cli.command()
@click.option("--city-dir", type=click.Path(exists=True),
              help="directory with students.csv, service_lines.csv, parcels.geojson, segments.geojson")
@click.option("--students", type=click.Path(exists=True))
@click.option("--lines", type=click.Path(exists=True))
@click.option("--parcels", type=click.Path(exists=True))
@click.option("--segments", type=click.Path(exists=True))
@click.option("--d", default=1.0, type=float)
@click.option("--k", default=0.0, type=float)
@click.option("--cap", type=float)
@click.option("--leave-age", default=18.0, type=float)
@click.option("--lead-policy", default="conservative")
@click.option("--host", default="127.0.0.1", envvar="LEADPLAN_HOST")
@click.option("--port", default=8000, type=int, envvar="LEADPLAN_PORT")
@click.option("--max-simulation-n", default=500, type=int,
              envvar="LEADPLAN_MAX_SIMULATION_N")
@click.option("--max-iterations", default=200, type=int,
              envvar="LEADPLAN_MAX_ITERATIONS")
@fail_cleanly
def serve(city_dir, students, lines, parcels, segments, d, k, cap, leave_age,
          lead_policy, host, port, max_simulation_n, max_iterations):
    """Load a snapshot and serve the read-only JSON API."""
    import uvicorn

    from .service.state import ServiceLimits

    if city_dir:
        paths = pipeline.SnapshotPaths.from_dir(city_dir)
    elif all([students, lines, parcels, segments]):
        paths = pipeline.SnapshotPaths(
            students=Path(students), lines=Path(lines),
            parcels=Path(parcels), segments=Path(segments),
        )
    else:
        raise click.UsageError("provide --city-dir or all four input paths")
    store = SnapshotStore(
        config=_config(d, k, cap, leave_age, lead_policy),
        limits=ServiceLimits(max_simulation_n=max_simulation_n,
                             max_iterations=max_iterations),
    )
    store.load(paths)
    app = create_app(store)
    click.echo(f"serving {len(store.state.projects)} projects on {host}:{port}")
    uvicorn.run(app, host=host, port=port)


def main():
    cli()


if __name__ == "__main__":
    main()
