"""Exposure-years project value and cost heuristics.

A project's value is the total remaining childhood exposure it would
remove: for each child living at one of its lead-weighted parcels, the
years until that child reaches the leave-home age (optionally capped by a
replacement horizon). Costs are a per-side constant times the lead side
count plus fixed overhead, or simply street length when line data is too
thin to trust.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

from .errors import GradeOutOfRange, MissingProbability, NegativeAge
from .model import (
    ChildRecord,
    LeadStatusPolicy,
    Parcel,
    PipeMaterial,
    PlanConfig,
    Project,
    ServiceLine,
)

EXPECTED_AGE_AT_KINDERGARTEN = 5.5  # mid-year expectation; configurable offset


@dataclass(frozen=True)
class ParcelLeadWeight:
    parcel_id: str
    weight: float  # max over sides; 0 or 1 under non-probabilistic policies

    def __post_init__(self):
        if not (0.0 <= self.weight <= 1.0):
            raise ValueError(f"weight out of [0,1]: {self.weight}")


def estimate_age_from_grade(grade: int) -> float:
    """Expected age for a school grade (kindergarten = 0 -> 5.5 years)."""
    if not isinstance(grade, int) or isinstance(grade, bool):
        raise GradeOutOfRange(f"grade must be an integer, got {grade!r}")
    if not (0 <= grade <= 12):
        raise GradeOutOfRange(f"grade {grade} outside [0,12]")
    return grade + EXPECTED_AGE_AT_KINDERGARTEN


def exposure_years(
    age: float, leave_home_age: float = 18.0, cap: Optional[float] = None
) -> float:
    """Years of exposure remaining before the child leaves home.

    Zero once the child has reached the leave-home age; never negative.
    ``cap`` bounds the estimate when all lines will be replaced within a
    known horizon anyway.
    """
    if age < 0:
        raise NegativeAge(f"age {age} is negative")
    remaining = max(0.0, leave_home_age - age)
    if cap is not None:
        remaining = min(remaining, cap)
    return remaining


def resolve_age(child: ChildRecord) -> float:
    """Known age wins; otherwise the grade-based estimate."""
    if child.age_years is not None:
        return child.age_years
    return estimate_age_from_grade(child.grade)


def resolve_ages(children: Iterable[ChildRecord]) -> dict[str, float]:
    return {c.child_id: resolve_age(c) for c in children}


def lead_weight(
    line: ServiceLine, parcel: Parcel, policy: LeadStatusPolicy
) -> tuple[float, float]:
    """Per-side (public, private) lead weights in [0,1].

    Known materials override any policy: lead is 1, other known materials
    are 0. Unknown sides fall to the policy — year-built cutoff (missing
    year counts as not-before-cutoff), a fixed intermediate weight, the
    conservative all-lead assumption, or the line's model probability.
    """

    def side(material: PipeMaterial) -> float:
        if material is PipeMaterial.LEAD:
            return 1.0
        if material is not PipeMaterial.UNKNOWN:
            return 0.0
        if policy.kind == "assume_lead_if_built_before":
            built = parcel.year_built
            return 1.0 if built is not None and built < policy.cutoff_year else 0.0
        if policy.kind == "fixed_unknown_weight":
            return policy.unknown_weight
        if policy.kind == "conservative_all_unknown_lead":
            return 1.0
        if line.lead_probability is None:
            raise MissingProbability(
                f"line at parcel {line.parcel_id!r} has no lead_probability"
            )
        return line.lead_probability

    return side(line.public_material), side(line.private_material)


def parcel_lead_weights(
    parcels: Mapping[str, Parcel],
    lines: Mapping[str, ServiceLine],
    policy: LeadStatusPolicy,
) -> dict[str, ParcelLeadWeight]:
    """Collapse per-side weights to one per parcel (exposure needs one lead
    side, so the max of the two sides applies)."""
    out = {}
    for parcel_id, line in lines.items():
        parcel = parcels.get(parcel_id)
        if parcel is None:
            continue
        public_w, private_w = lead_weight(line, parcel, policy)
        out[parcel_id] = ParcelLeadWeight(parcel_id, max(public_w, private_w))
    return out


def project_value(
    project: Project,
    children_by_parcel: Mapping[str, frozenset[str]],
    ages: Mapping[str, float],
    config: PlanConfig,
    weights: Mapping[str, ParcelLeadWeight],
) -> float:
    """Exposure-years removed by completing the project.

    Sums each resident child's remaining exposure, scaled by the parcel's
    lead weight; parcels with zero weight contribute nothing.
    """
    # sorted accumulation keeps the float sum identical across runs
    total = 0.0
    for parcel_id in sorted(project.parcel_ids):
        w = weights.get(parcel_id)
        if w is None or w.weight <= 0.0:
            continue
        for child_id in sorted(children_by_parcel.get(parcel_id, ())):
            t = exposure_years(
                ages[child_id], config.leave_home_age, config.horizon_cap_years
            )
            total += t * w.weight
    return total


def project_cost(project: Project, config: PlanConfig) -> float:
    """Per-line cost times the lead side count, plus fixed overhead."""
    return config.per_line_cost * project.lead_line_count + config.fixed_cost


def project_cost_length(project: Project) -> float:
    """Street length as the even simpler cost proxy."""
    return project.segment.length_m


def project_child_count(
    project: Project,
    children_by_parcel: Mapping[str, frozenset[str]],
    weights: Mapping[str, ParcelLeadWeight],
) -> int:
    """Children living at the project's lead-weighted parcels."""
    count = 0
    for parcel_id in project.parcel_ids:
        w = weights.get(parcel_id)
        if w is None or w.weight <= 0.0:
            continue
        count += len(children_by_parcel.get(parcel_id, ()))
    return count


def score_projects(
    projects: Sequence[Project],
    children_by_parcel: Mapping[str, frozenset[str]],
    ages: Mapping[str, float],
    config: PlanConfig,
    weights: Mapping[str, ParcelLeadWeight],
) -> tuple[list[Project], dict[str, int]]:
    """Fill cached value/cost on every project; also return child counts."""
    scored = []
    child_counts = {}
    for project in projects:
        value = project_value(project, children_by_parcel, ages, config, weights)
        cost = project_cost(project, config)
        scored.append(replace(
            project, value_exposure_years=value, cost_units=cost
        ))
        child_counts[project.project_id] = project_child_count(
            project, children_by_parcel, weights
        )
    return scored, child_counts
