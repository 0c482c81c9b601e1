"""End-to-end wiring: files in, validated snapshot and scored projects out.

Each stage also exists standalone (and the CLI exposes them with file
handoffs so planners can inspect and correct intermediates); this module is
the one-call path used by the HTTP service and the tests.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ingest, linkage, partition, scoring
from .errors import FileUnreadable
from .linkage import GeocoderPort, JunctionEntry, UnmatchedRecord
from .model import PlanConfig, Project, Snapshot, ValidationReport

log = logging.getLogger(__name__)


@dataclass
class SnapshotPaths:
    students: Path
    lines: Path
    parcels: Path
    segments: Path
    corrections: Optional[Path] = None

    @classmethod
    def from_dir(cls, directory) -> "SnapshotPaths":
        d = Path(directory)
        corrections = d / "corrections.csv"
        return cls(
            students=d / "students.csv",
            lines=d / "service_lines.csv",
            parcels=d / "parcels.geojson",
            segments=d / "segments.geojson",
            corrections=corrections if corrections.exists() else None,
        )


@dataclass
class LinkedSnapshot:
    snapshot: Snapshot
    report: ValidationReport
    junction: list[JunctionEntry]
    unmatched: list[UnmatchedRecord]
    orphan_children: list[str] = field(default_factory=list)


def make_geocoder(
    mode: str,
    parcels=None,
    cache_path=None,
    live_url: Optional[str] = None,
    api_key: Optional[str] = None,
) -> GeocoderPort:
    """mock: fuzzy table built from the parcel universe; cache: offline
    cache-only; live: HTTP client behind the persistent cache."""
    if mode == "mock":
        return linkage.FuzzyTableGeocoder.from_parcels(parcels or [])
    if mode == "cache":
        if cache_path is None:
            raise FileUnreadable("cache mode needs a cache path")
        return linkage.CachedGeocoder(ingest.GeocodeCache(cache_path))
    if mode == "live":
        if not live_url:
            raise FileUnreadable("live mode needs a geocoder URL")
        live = linkage.LiveGeocoder(live_url, api_key=api_key)
        if cache_path is not None:
            return linkage.CachedGeocoder(ingest.GeocodeCache(cache_path), live)
        return live
    raise ValueError(f"unknown geocoder mode {mode!r}")


def load_snapshot(
    paths: SnapshotPaths,
    geocoder: Optional[GeocoderPort] = None,
    threshold: float = linkage.DEFAULT_MATCH_THRESHOLD,
    max_workers: int = 1,
) -> LinkedSnapshot:
    """Load, link, and validate one planning cycle's inputs.

    With no geocoder given, a fuzzy table geocoder built from the parcel
    universe is used — fully offline, deterministic.
    """
    students = ingest.load_students(paths.students)
    lines = ingest.load_service_lines(paths.lines)
    parcel_geo = ingest.load_geo(paths.parcels)
    segment_geo = ingest.load_geo(paths.segments)
    for name, result in (("students", students), ("lines", lines)):
        if result.rejects:
            log.warning("%s: %d rows rejected", name, len(result.rejects))

    parcels = parcel_geo.parcels
    if geocoder is None:
        geocoder = linkage.FuzzyTableGeocoder.from_parcels(parcels)

    child_records = [
        ("students", c.child_id, c.raw_address) for c in students.records
    ]
    parcel_records = [
        ("parcels", p.parcel_id, p.address.formatted) for p in parcels
    ]
    junction, unmatched = linkage.build_junction(
        child_records + parcel_records, geocoder, threshold, max_workers
    )

    if paths.corrections is not None:
        overrides = ingest.load_corrections(paths.corrections)
        universe = {p.address.place_id for p in parcels}
        universe.update(e.place_id for e in junction)
        junction = linkage.apply_corrections(junction, overrides, universe)

    child_junction = [e for e in junction if e.source_dataset == "students"]
    parcel_junction = [e for e in junction if e.source_dataset == "parcels"]
    mapping, orphans = linkage.children_by_parcel(child_junction, parcel_junction)

    snapshot, report = Snapshot.build(
        parcels, lines.records, students.records, segment_geo.segments, mapping
    )
    return LinkedSnapshot(snapshot, report, junction, unmatched, orphans)


@dataclass
class ScoredPlan:
    projects: list[Project]
    child_counts: dict[str, int]
    assignment: dict[str, str]
    flagged_parcels: list[str]


def score_snapshot(snapshot: Snapshot, config: Optional[PlanConfig] = None) -> ScoredPlan:
    """Partition, assign, and score a validated snapshot."""
    config = config or PlanConfig()
    segments = partition.split_streets(
        snapshot.segments.values(), config.max_segment_m
    )
    assigned = partition.assign_parcels(snapshot.parcels.values(), segments)
    projects = partition.build_projects(
        segments, assigned.assignment, snapshot.lines.values(),
        snapshot.parcels, config.lead_policy,
    )
    ages = scoring.resolve_ages(snapshot.children.values())
    weights = scoring.parcel_lead_weights(
        snapshot.parcels, snapshot.lines, config.lead_policy
    )
    scored, child_counts = scoring.score_projects(
        projects, snapshot.children_by_parcel, ages, config, weights
    )
    return ScoredPlan(scored, child_counts, assigned.assignment, assigned.flagged)
