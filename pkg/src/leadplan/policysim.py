"""Replacement-policy simulation and cumulative-impact curves.

Competing orderings of the same project portfolio are compared by how fast
their cumulative metrics (exposure-years, children, lines, cost) climb as
projects complete. Stochastic policies replay exactly from their seed; the
random source is the stdlib Mersenne generator, which is stable across
platforms for a fixed seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from statistics import median
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import (
    IndexOutOfRange,
    NotEnoughProjects,
    UnknownPolicy,
    ZeroTotalValue,
)
from .model import Project
from .prioritize import rank_projects

DETERMINISTIC_KINDS = ("by_length", "by_lead_per_meter", "by_bcr", "by_value")
STOCHASTIC_KINDS = ("uniform_random", "weighted_by_exposure")
_ALIASES = {"by_length_excavated": "by_length"}


@dataclass(frozen=True)
class Policy:
    """One project-selection policy; stochastic kinds carry their seed."""

    kind: str
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind not in DETERMINISTIC_KINDS + STOCHASTIC_KINDS:
            raise UnknownPolicy(f"unknown policy {self.kind!r}")
        if self.kind in STOCHASTIC_KINDS and self.seed is None:
            raise ValueError(f"policy {self.kind!r} requires a seed")
        if self.kind in DETERMINISTIC_KINDS and self.seed is not None:
            raise ValueError(f"policy {self.kind!r} is deterministic, drop the seed")

    @property
    def stochastic(self) -> bool:
        return self.kind in STOCHASTIC_KINDS

    def label(self) -> str:
        return self.kind if self.seed is None else f"{self.kind}[{self.seed}]"


def parse_policy(name: str, seed: Optional[int] = None) -> Policy:
    kind = _ALIASES.get(name.strip(), name.strip())
    if kind in STOCHASTIC_KINDS:
        return Policy(kind, seed if seed is not None else 0)
    return Policy(kind)


class StepMetrics(NamedTuple):
    exposure_years: float
    children: int
    lines: int
    cost: float


@dataclass(frozen=True)
class PolicyRun:
    policy: Policy
    ordering: tuple[str, ...]
    per_step: tuple[StepMetrics, ...]


@dataclass(frozen=True)
class SimulationOutcome:
    """All iterations of one policy plus the pointwise median trajectory."""

    policy: Policy
    runs: tuple[PolicyRun, ...]
    median_per_step: tuple[StepMetrics, ...]


def policy_ordering(
    policy: Policy, projects: Sequence[Project], n: int
) -> list[str]:
    """First ``n`` project ids under the policy.

    Deterministic kinds are full sorts with id tie-breaks. Stochastic kinds
    sample without replacement: uniformly, or with draw probability
    proportional to project value (zero-value projects only after every
    positive-value project is exhausted).
    """
    if n > len(projects):
        raise NotEnoughProjects(f"asked for {n} of {len(projects)} projects")
    if n < 0:
        raise ValueError("n must be >= 0")

    if policy.kind == "by_length":
        ordered = sorted(projects, key=lambda p: (-p.segment.length_m, p.project_id))
        return [p.project_id for p in ordered[:n]]
    if policy.kind == "by_lead_per_meter":
        ordered = sorted(
            projects,
            key=lambda p: (-(p.lead_line_count / p.segment.length_m), p.project_id),
        )
        return [p.project_id for p in ordered[:n]]
    if policy.kind == "by_bcr":
        return [entry.project_id for entry in rank_projects(projects)[:n]]
    if policy.kind == "by_value":
        ordered = sorted(
            projects, key=lambda p: (-p.value_exposure_years, p.project_id)
        )
        return [p.project_id for p in ordered[:n]]

    rng = random.Random(f"{policy.kind}:{policy.seed}")
    ids = sorted(p.project_id for p in projects)
    if policy.kind == "uniform_random":
        return rng.sample(ids, n)

    # weighted_by_exposure: sequential renormalized draws
    values = {p.project_id: p.value_exposure_years for p in projects}
    pool = list(ids)
    out: list[str] = []
    for _ in range(n):
        positive = [(pid, values[pid]) for pid in pool if values[pid] > 0.0]
        if positive:
            total = sum(w for _, w in positive)
            r = rng.random() * total
            acc = 0.0
            pick = positive[-1][0]
            for pid, w in positive:
                acc += w
                if r < acc:
                    pick = pid
                    break
        else:
            pick = pool[rng.randrange(len(pool))]
        pool.remove(pick)
        out.append(pick)
    return out


def run_trajectory(
    policy: Policy,
    ordering: Sequence[str],
    projects: Mapping[str, Project],
    child_counts: Optional[Mapping[str, int]] = None,
) -> PolicyRun:
    steps: list[StepMetrics] = []
    value = 0.0
    children = 0
    lines = 0
    cost = 0.0
    for project_id in ordering:
        p = projects[project_id]
        value += p.value_exposure_years
        children += (child_counts or {}).get(project_id, 0)
        lines += p.lead_line_count
        cost += p.cost_units
        steps.append(StepMetrics(value, children, lines, cost))
    return PolicyRun(policy, tuple(ordering), tuple(steps))


def simulate(
    policies: Iterable[Policy],
    projects: Sequence[Project],
    n: int = 100,
    iterations: int = 1,
    child_counts: Optional[Mapping[str, int]] = None,
) -> list[SimulationOutcome]:
    """Run each policy and aggregate iterations by the pointwise median.

    Stochastic policies get ``iterations`` independent seeded runs (seeds
    derived from the policy seed, recorded on each run for replay);
    deterministic policies run exactly once.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    by_id = {p.project_id: p for p in projects}
    outcomes = []
    for policy in policies:
        if policy.stochastic:
            variants = [
                Policy(policy.kind, seed=policy.seed * 1_000_003 + i)
                for i in range(iterations)
            ]
        else:
            variants = [policy]
        runs = tuple(
            run_trajectory(v, policy_ordering(v, projects, n), by_id, child_counts)
            for v in variants
        )
        medians = tuple(
            StepMetrics(
                median(r.per_step[k].exposure_years for r in runs),
                median(r.per_step[k].children for r in runs),
                median(r.per_step[k].lines for r in runs),
                median(r.per_step[k].cost for r in runs),
            )
            for k in range(n)
        )
        outcomes.append(SimulationOutcome(policy, runs, medians))
    return outcomes


class CurvePoint(NamedTuple):
    index: int  # 1-based position in the ordering
    fraction: float  # cumulative share of total value, in [0,1]


def cumulative_curve(
    ordering: Sequence[str], projects: Sequence[Project]
) -> list[CurvePoint]:
    """Cumulative share of total value after each project in the ordering.

    The denominator is the whole portfolio, so a full value-sorted ordering
    ends at exactly 1.0.
    """
    total = sum(p.value_exposure_years for p in projects)
    if total <= 0:
        raise ZeroTotalValue("portfolio has no exposure-years value")
    by_id = {p.project_id: p for p in projects}
    out: list[CurvePoint] = []
    acc = 0.0
    for k, project_id in enumerate(ordering, start=1):
        acc += by_id[project_id].value_exposure_years
        out.append(CurvePoint(k, acc / total))
    return out


def quantile_table(
    curve: Sequence[CurvePoint], indices: Iterable[int]
) -> list[tuple[int, float]]:
    """Read selected points off the curve as (index, percent to 1 decimal)."""
    out = []
    for index in indices:
        if not (1 <= index <= len(curve)):
            raise IndexOutOfRange(f"index {index} outside 1..{len(curve)}")
        out.append((index, round(curve[index - 1].fraction * 100.0, 1)))
    return out


# --- export shapes ---

TRAJECTORY_COLUMNS = [
    "policy", "iteration", "step", "exposure_years", "children", "lines", "cost",
]


def trajectory_csv_rows(outcomes: Sequence[SimulationOutcome]) -> list[list]:
    rows: list[list] = [list(TRAJECTORY_COLUMNS)]
    for outcome in outcomes:
        for i, run in enumerate(outcome.runs):
            for k, step in enumerate(run.per_step, start=1):
                rows.append([
                    outcome.policy.label(), i, k,
                    repr(step.exposure_years), step.children, step.lines,
                    repr(step.cost),
                ])
        for k, step in enumerate(outcome.median_per_step, start=1):
            rows.append([
                outcome.policy.label(), "median", k,
                repr(step.exposure_years), step.children, step.lines,
                repr(step.cost),
            ])
    return rows


def trajectories_json(outcomes: Sequence[SimulationOutcome]) -> list[dict]:
    """Plot-ready summaries: one entry per policy, median trajectory only."""
    payload = []
    for outcome in outcomes:
        payload.append({
            "policy": outcome.policy.kind,
            "seed": outcome.policy.seed,
            "iterations": len(outcome.runs),
            "median": [
                {
                    "step": k,
                    "exposure_years": step.exposure_years,
                    "children": step.children,
                    "lines": step.lines,
                    "cost": step.cost,
                }
                for k, step in enumerate(outcome.median_per_step, start=1)
            ],
        })
    return payload
