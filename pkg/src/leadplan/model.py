"""Core domain types for the replacement-planning toolkit.

Everything here is immutable once a snapshot validates, so scoring,
ranking, and simulation can share the same objects across workers without
locks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .geo import LatLon, bounding_box


class PipeMaterial(Enum):
    BRASS = "brass"
    IRON = "iron"
    COPPER = "copper"
    LEAD = "lead"
    PVC = "pvc"
    STEEL = "steel"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "PipeMaterial":
        """Case-insensitive lookup; raises ValueError for anything else."""
        return cls(text.strip().lower())


@dataclass(frozen=True)
class GeoAddress:
    """Canonical geocoded place with a globally unique id."""

    place_id: str
    point: LatLon
    street_number: str = ""
    route: str = ""
    locality: str = ""
    postal_code: str = ""
    formatted: str = ""

    def __post_init__(self):
        if not self.place_id:
            raise ValueError("place_id must be non-empty")
        lat, lon = self.point
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise ValueError(f"point out of WGS84 range: {self.point}")


@dataclass(frozen=True)
class MatchCandidate:
    address: GeoAddress
    probability: float

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"probability out of [0,1]: {self.probability}")


@dataclass(frozen=True)
class ServiceLine:
    parcel_id: str
    public_material: PipeMaterial
    private_material: PipeMaterial
    lead_probability: Optional[float] = None

    def __post_init__(self):
        if self.lead_probability is not None and not (
            0.0 <= self.lead_probability <= 1.0
        ):
            raise ValueError(f"lead_probability out of [0,1]: {self.lead_probability}")


@dataclass(frozen=True)
class Parcel:
    parcel_id: str
    address: GeoAddress
    centroid: LatLon
    year_built: Optional[int] = None


@dataclass(frozen=True)
class ChildRecord:
    """Anonymized student: a grade and/or age plus the raw address text."""

    child_id: str
    raw_address: str
    grade: Optional[int] = None
    age_years: Optional[float] = None

    def __post_init__(self):
        if self.grade is None and self.age_years is None:
            raise ValueError("one of grade or age_years is required")
        if self.grade is not None and not (0 <= self.grade <= 12):
            raise ValueError(f"grade out of [0,12]: {self.grade}")
        if self.age_years is not None and self.age_years < 0:
            raise ValueError(f"age_years negative: {self.age_years}")


@dataclass(frozen=True)
class StreetSegment:
    segment_id: str
    polyline: tuple[LatLon, ...]
    length_m: float
    street_name: str


@dataclass(frozen=True)
class Project:
    """A street segment plus its parcels, with cached value and cost.

    ``value_exposure_years`` and ``cost_units`` are zero until the scoring
    pass fills them; ranking refuses non-positive costs.
    """

    project_id: str
    segment: StreetSegment
    parcel_ids: frozenset[str]
    value_exposure_years: float = 0.0
    cost_units: float = 0.0
    lead_line_count: int = 0


_POLICY_KINDS = (
    "assume_lead_if_built_before",
    "fixed_unknown_weight",
    "conservative_all_unknown_lead",
    "use_probability_field",
)


@dataclass(frozen=True)
class LeadStatusPolicy:
    """How unknown-material sides are weighted when counting lead lines."""

    kind: str
    cutoff_year: Optional[int] = None
    unknown_weight: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise ValueError(f"unknown lead policy kind: {self.kind}")
        if self.kind == "assume_lead_if_built_before" and self.cutoff_year is None:
            raise ValueError("cutoff_year required")
        if self.kind == "fixed_unknown_weight":
            if self.unknown_weight is None or not (0.0 <= self.unknown_weight <= 1.0):
                raise ValueError("unknown_weight must be in [0,1]")

    @classmethod
    def assume_lead_if_built_before(cls, year: int) -> "LeadStatusPolicy":
        return cls("assume_lead_if_built_before", cutoff_year=year)

    @classmethod
    def fixed_unknown_weight(cls, weight: float = 0.5) -> "LeadStatusPolicy":
        # 0.5 is the middle value used when planners pick the intermediate
        # policy without naming a weight.
        return cls("fixed_unknown_weight", unknown_weight=weight)

    @classmethod
    def conservative(cls) -> "LeadStatusPolicy":
        return cls("conservative_all_unknown_lead")

    @classmethod
    def use_probability_field(cls) -> "LeadStatusPolicy":
        return cls("use_probability_field")


@dataclass(frozen=True)
class PlanConfig:
    """Planning knobs: budget, cost constants, and exposure parameters."""

    budget: float = 0.0
    per_line_cost: float = 1.0
    fixed_cost: float = 0.0
    leave_home_age: float = 18.0
    horizon_cap_years: Optional[float] = None
    lead_policy: LeadStatusPolicy = field(
        default_factory=LeadStatusPolicy.conservative
    )
    max_segment_m: float = 150.0

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.per_line_cost <= 0:
            raise ValueError("per_line_cost must be > 0")
        if self.fixed_cost < 0:
            raise ValueError("fixed_cost must be >= 0")
        if self.leave_home_age <= 0:
            raise ValueError("leave_home_age must be > 0")
        if self.horizon_cap_years is not None and self.horizon_cap_years <= 0:
            raise ValueError("horizon_cap_years must be > 0 when set")
        if self.max_segment_m <= 0:
            raise ValueError("max_segment_m must be > 0")


# --- snapshot validation ---

@dataclass(frozen=True)
class Defect:
    kind: str  # dangling_reference | duplicate_key | field_range
    dataset: str
    key: str
    message: str
    fatal: bool = True


@dataclass
class ValidationReport:
    defects: list[Defect] = field(default_factory=list)

    @property
    def usable(self) -> bool:
        return not any(d.fatal for d in self.defects)

    def add(self, kind: str, dataset: str, key: str, message: str, fatal: bool = True):
        self.defects.append(Defect(kind, dataset, key, message, fatal))


def validate_snapshot(
    parcels: Sequence[Parcel],
    lines: Sequence[ServiceLine],
    children: Sequence[ChildRecord],
    segments: Sequence[StreetSegment],
    children_by_parcel: Optional[Mapping[str, Iterable[str]]] = None,
) -> ValidationReport:
    """Cross-check referential integrity, key uniqueness, and field ranges.

    Defects are reported, never raised; the snapshot is usable iff no fatal
    defect is present.
    """
    report = ValidationReport()

    parcel_ids = _check_unique(report, "parcels", (p.parcel_id for p in parcels))
    child_ids = _check_unique(report, "children", (c.child_id for c in children))
    _check_unique(report, "segments", (s.segment_id for s in segments))
    _check_unique(report, "lines", (ln.parcel_id for ln in lines))

    for ln in lines:
        if ln.parcel_id not in parcel_ids:
            report.add(
                "dangling_reference", "lines", ln.parcel_id,
                f"service line references missing parcel {ln.parcel_id!r}",
            )
        if ln.lead_probability is not None and not (0 <= ln.lead_probability <= 1):
            report.add(
                "field_range", "lines", ln.parcel_id,
                f"lead_probability {ln.lead_probability} outside [0,1]",
            )

    for child in children:
        if child.grade is not None and not (0 <= child.grade <= 12):
            report.add(
                "field_range", "children", child.child_id,
                f"grade {child.grade} outside [0,12]",
            )
        if child.age_years is not None and child.age_years < 0:
            report.add(
                "field_range", "children", child.child_id,
                f"age_years {child.age_years} negative",
            )

    for seg in segments:
        if seg.length_m <= 0:
            report.add(
                "field_range", "segments", seg.segment_id,
                f"length_m {seg.length_m} not positive",
            )

    for p in parcels:
        lat, lon = p.centroid
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            report.add(
                "field_range", "parcels", p.parcel_id,
                f"centroid {p.centroid} outside WGS84 range",
            )

    # Parcel centroids should sit inside the street network's neighborhood;
    # catches (0, 0) placeholders against a real-city extent.
    if segments and parcels:
        seg_pts = [pt for s in segments for pt in s.polyline]
        min_lat, min_lon, max_lat, max_lon = bounding_box(seg_pts)
        pad_lat = max(0.02, (max_lat - min_lat) * 0.5)
        pad_lon = max(0.02, (max_lon - min_lon) * 0.5)
        for p in parcels:
            lat, lon = p.centroid
            if not (
                min_lat - pad_lat <= lat <= max_lat + pad_lat
                and min_lon - pad_lon <= lon <= max_lon + pad_lon
            ):
                report.add(
                    "field_range", "parcels", p.parcel_id,
                    f"centroid {p.centroid} far outside the dataset bounding box",
                )

    if children_by_parcel is not None:
        for parcel_id, kids in children_by_parcel.items():
            if parcel_id not in parcel_ids:
                report.add(
                    "dangling_reference", "children_by_parcel", parcel_id,
                    f"child mapping references missing parcel {parcel_id!r}",
                )
            for child_id in kids:
                if child_id not in child_ids:
                    report.add(
                        "dangling_reference", "children_by_parcel", child_id,
                        f"child mapping references missing child {child_id!r}",
                    )

    return report


def _check_unique(report: ValidationReport, dataset: str, keys: Iterable[str]) -> set[str]:
    seen: set[str] = set()
    for key in keys:
        if key in seen:
            report.add("duplicate_key", dataset, key, f"duplicate key {key!r}")
        seen.add(key)
    return seen


@dataclass(frozen=True)
class Snapshot:
    """Validated, immutable bundle of one planning cycle's inputs."""

    parcels: Mapping[str, Parcel]
    lines: Mapping[str, ServiceLine]  # keyed by parcel_id, one line per parcel
    children: Mapping[str, ChildRecord]
    segments: Mapping[str, StreetSegment]
    children_by_parcel: Mapping[str, frozenset[str]]

    @classmethod
    def build(
        cls,
        parcels: Sequence[Parcel],
        lines: Sequence[ServiceLine],
        children: Sequence[ChildRecord],
        segments: Sequence[StreetSegment],
        children_by_parcel: Mapping[str, Iterable[str]],
    ) -> tuple["Snapshot", ValidationReport]:
        report = validate_snapshot(parcels, lines, children, segments, children_by_parcel)
        snap = cls(
            parcels={p.parcel_id: p for p in parcels},
            lines={ln.parcel_id: ln for ln in lines},
            children={c.child_id: c for c in children},
            segments={s.segment_id: s for s in segments},
            children_by_parcel={
                k: frozenset(v) for k, v in children_by_parcel.items()
            },
        )
        return snap, report
