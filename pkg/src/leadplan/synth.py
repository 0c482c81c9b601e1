"""Synthetic municipal datasets for development, benchmarks, and fixtures.

Real school rolls and line inventories cannot ship with the code, so these
generators produce cities with the same statistical fingerprints: clustered
child placement, heavy-tailed project values, messy address spellings, and
a mix of known/unknown line materials. Ground truth is retained so tests
can compare pipeline output against the intended placements.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ingest
from .geo import EARTH_RADIUS_M
from .model import (
    ChildRecord,
    GeoAddress,
    Parcel,
    PipeMaterial,
    Project,
    ServiceLine,
    StreetSegment,
)

# All base names are >= 7 characters so a one-character slip still clears
# the default fuzzy-match threshold.
STREET_WORDS = [
    "PLEASANT", "HIGHLAND", "WASHINGTON", "FELLSWAY", "BROADWAY", "COMMERCIAL",
    "MOUNTAIN", "HARVARD", "WINTHROP", "FLORENCE", "MADISON", "FRANKLIN",
    "SHERMAN", "PRESCOTT", "GLENWOOD", "BELMONT", "CLIFTON", "WAVERLY",
    "EASTERN", "WESTERN", "CENTRAL", "MERIDIAN", "ORCHARD", "CHESTNUT",
    "HAWTHORNE", "SYCAMORE", "MAGNOLIA", "JUNIPER", "WHITTIER", "EMERSON",
    "LONGFELLOW", "GARFIELD", "SHERIDAN", "COLUMBIA", "LAFAYETTE", "CONCORD",
    "LEXINGTON", "ARLINGTON", "SOMERSET", "BRADFORD", "CRESCENT", "WINDSOR",
    "HAMPSHIRE", "BERKSHIRE", "PLYMOUTH", "SUFFOLK", "NORFOLK", "BRISTOL",
    "WYOMING", "HANCOCK",
]
SUFFIX_POOL = ["ST", "AVE", "RD", "DR", "LN", "CT", "TER", "PL", "WAY", "BLVD"]

_SUFFIX_SPELLINGS = {
    "ST": ["St", "Street", "ST", "St."],
    "AVE": ["Ave", "Avenue", "AVE", "Ave."],
    "RD": ["Rd", "Road", "RD"],
    "DR": ["Dr", "Drive", "DR"],
    "LN": ["Ln", "Lane", "LN"],
    "CT": ["Ct", "Court", "CT"],
    "TER": ["Ter", "Terrace", "TER"],
    "PL": ["Pl", "Place", "PL"],
    "WAY": ["Way", "WAY"],
    "BLVD": ["Blvd", "Boulevard", "BLVD"],
}

CITY_ORIGIN = (42.43, -71.05)  # middle of a generic New England grid
_M_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0


def _street_names(count: int) -> list[tuple[str, str]]:
    names = []
    for suffix in SUFFIX_POOL:
        for word in STREET_WORDS:
            names.append((word, suffix))
            if len(names) == count:
                return names
    raise ValueError(f"name pool exhausted at {len(names)} < {count}")


def _street_polyline(row: int, length_m: float) -> tuple[tuple[float, float], ...]:
    lat = CITY_ORIGIN[0] + row * 120.0 / _M_PER_DEG_LAT
    m_per_deg_lon = _M_PER_DEG_LAT * math.cos(math.radians(lat))
    lon0 = CITY_ORIGIN[1]
    return ((lat, lon0), (lat, lon0 + length_m / m_per_deg_lon))


def _parcel_point(street: tuple[tuple[float, float], ...], along: float,
                  side: int) -> tuple[float, float]:
    (lat, lon0), (_, lon1) = street
    lon = lon0 + (lon1 - lon0) * along
    return (lat + side * 12.0 / _M_PER_DEG_LAT, lon)


@dataclass
class SyntheticCity:
    centerlines: list[StreetSegment]
    parcels: list[Parcel]
    lines: list[ServiceLine]
    children: list[ChildRecord]
    child_parcel_truth: dict[str, str] = field(default_factory=dict)

    def write(self, outdir):
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        ingest.write_segments(outdir / "segments.geojson", self.centerlines)
        ingest.write_parcels(outdir / "parcels.geojson", self.parcels)
        ingest.write_service_lines(outdir / "service_lines.csv", self.lines)
        ingest.write_students(outdir / "students.csv", self.children)
        import json

        with open(outdir / "truth.json", "w", encoding="utf-8") as fh:
            json.dump({"child_parcel": self.child_parcel_truth}, fh, indent=0)


def _make_parcel(parcel_id: str, number: int, word: str, suffix: str,
                 point: tuple[float, float], year_built: Optional[int],
                 spelled_suffix: Optional[str] = None) -> Parcel:
    display = spelled_suffix or suffix.title()
    text = f"{number} {word.title()} {display}"
    address = GeoAddress(
        place_id=f"parcel:{parcel_id}",
        point=point,
        street_number=str(number),
        route=f"{word.title()} {suffix}",
        formatted=text,
    )
    return Parcel(parcel_id=parcel_id, address=address, centroid=point,
                  year_built=year_built)


def generate_city(
    seed: int,
    n_streets: int = 24,
    parcels_per_street: tuple[int, int] = (6, 14),
    lead_rate: float = 0.45,
    unknown_rate: float = 0.15,
    child_cluster_exponent: float = 1.3,
    address_variation: bool = True,
) -> SyntheticCity:
    """Random city with clustered children and mixed line materials.

    Child placement is heavy-tailed across streets (a few kid-dense blocks,
    many quiet ones), which is what makes value-informed orderings beat
    line-count orderings in simulation.
    """
    rng = random.Random(f"city:{seed}")
    names = _street_names(n_streets)
    city = SyntheticCity([], [], [], [])

    child_serial = 0
    for row, (word, suffix) in enumerate(names):
        length = rng.uniform(70.0, 230.0)
        polyline = _street_polyline(row, length)
        street_name = f"{word} {suffix}"
        city.centerlines.append(StreetSegment(
            segment_id=f"cl-{row:04d}",
            polyline=polyline,
            length_m=length,
            street_name=street_name,
        ))

        n_parcels = rng.randint(*parcels_per_street)
        # street-level child intensity: heavy tail over streets
        intensity = rng.paretovariate(child_cluster_exponent) - 1.0
        for k in range(n_parcels):
            parcel_id = f"p-{row:04d}-{k:02d}"
            number = 2 * k + 1
            point = _parcel_point(polyline, (k + 0.5) / n_parcels,
                                  1 if k % 2 else -1)
            year = rng.randint(1890, 1995)
            spelled = (
                rng.choice(_SUFFIX_SPELLINGS[suffix]) if address_variation
                else suffix.title()
            )
            parcel = _make_parcel(parcel_id, number, word, suffix, point, year, spelled)
            city.parcels.append(parcel)

            city.lines.append(ServiceLine(
                parcel_id=parcel_id,
                public_material=_draw_material(rng, lead_rate, unknown_rate),
                private_material=_draw_material(rng, lead_rate, unknown_rate),
                lead_probability=round(rng.random(), 3),
            ))

            expected_kids = intensity * 0.9
            n_kids = _poisson(rng, expected_kids)
            for _ in range(n_kids):
                child_id = f"c-{child_serial:05d}"
                child_serial += 1
                grade = rng.randint(0, 12)
                city.children.append(ChildRecord(
                    child_id=child_id,
                    raw_address=_address_spelling(rng, parcel, address_variation),
                    grade=grade,
                ))
                city.child_parcel_truth[child_id] = parcel_id
    return city


def _draw_material(rng: random.Random, lead_rate: float, unknown_rate: float) -> PipeMaterial:
    r = rng.random()
    if r < lead_rate:
        return PipeMaterial.LEAD
    if r < lead_rate + unknown_rate:
        return PipeMaterial.UNKNOWN
    return rng.choice([PipeMaterial.COPPER, PipeMaterial.IRON, PipeMaterial.BRASS,
                       PipeMaterial.PVC, PipeMaterial.STEEL])


def _poisson(rng: random.Random, lam: float) -> int:
    if lam <= 0:
        return 0
    # Knuth's method; intensities here are small
    threshold = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= threshold:
            return k
        k += 1
        if k > 50:
            return k


def _address_spelling(rng: random.Random, parcel: Parcel, vary: bool) -> str:
    text = parcel.address.formatted
    if not vary:
        return text
    roll = rng.random()
    if roll < 0.25:
        return text.upper()
    if roll < 0.35:
        return text.lower()
    if roll < 0.45:
        return text + ", Malden MA"
    return text


# --- calibrated fixture: long-tail value profile ---

# Cumulative share anchors for the bundled long-tail fixture: (project
# index, cumulative percent of total value). Interpolated linearly, which
# makes per-project increments non-increasing -> monotone concave curve.
LONG_TAIL_ANCHORS = [
    (0, 0.0), (5, 10.3), (10, 15.5), (20, 22.7), (50, 37.2), (100, 53.0),
    (150, 64.5), (200, 73.2), (300, 86.4), (400, 94.7), (500, 100.0),
]


def long_tail_value_shares(n_projects: int = 500) -> list[float]:
    """Per-project value shares (percent) following the anchored long tail."""
    if n_projects != LONG_TAIL_ANCHORS[-1][0]:
        raise ValueError("profile is anchored at 500 projects")
    shares: list[float] = []
    for (a, pa), (b, pb) in zip(LONG_TAIL_ANCHORS, LONG_TAIL_ANCHORS[1:]):
        step = (pb - pa) / (b - a)
        shares.extend([step] * (b - a))
    return shares


def generate_calibrated_city(
    seed: int = 0,
    total_exposure_years: float = 12_000.0,
) -> SyntheticCity:
    """City whose 500 projects reproduce the long-tail cumulative curve.

    One street per project, every line lead, and children whose remaining
    exposure sums exactly to the project's target value, so the scored
    portfolio hits the anchor quantiles.
    """
    rng = random.Random(f"fig-city:{seed}")
    shares = long_tail_value_shares()
    names = _street_names(len(shares))
    city = SyntheticCity([], [], [], [])

    child_serial = 0
    for row, ((word, suffix), share) in enumerate(zip(names, shares)):
        target_value = share / 100.0 * total_exposure_years
        polyline = _street_polyline(row, 110.0)
        city.centerlines.append(StreetSegment(
            segment_id=f"cl-{row:04d}",
            polyline=polyline,
            length_m=110.0,
            street_name=f"{word} {suffix}",
        ))
        n_kids = max(1, math.ceil(target_value / 12.0))
        per_child = target_value / n_kids  # exposure-years each, <= 12
        for k in range(n_kids):
            parcel_id = f"p-{row:04d}-{k:02d}"
            point = _parcel_point(polyline, (k + 0.5) / n_kids, 1 if k % 2 else -1)
            parcel = _make_parcel(parcel_id, 2 * k + 1, word, suffix, point,
                                  year_built=rng.randint(1890, 1940))
            city.parcels.append(parcel)
            city.lines.append(ServiceLine(
                parcel_id=parcel_id,
                public_material=PipeMaterial.LEAD,
                private_material=PipeMaterial.LEAD,
            ))
            child_id = f"c-{child_serial:05d}"
            child_serial += 1
            city.children.append(ChildRecord(
                child_id=child_id,
                raw_address=parcel.address.formatted,
                age_years=18.0 - per_child,
            ))
            city.child_parcel_truth[child_id] = parcel_id
    return city


# --- direct project portfolios (no geo pipeline; fast for benchmarks) ---

def generate_portfolio(
    seed: int,
    n_projects: int = 40,
    lines_range: tuple[int, int] = (6, 18),
) -> tuple[list[Project], dict[str, int]]:
    """Scored project list with clustered child value; cost = line count.

    Street length is drawn independently of child placement, so
    length-based orderings carry no information about value.
    """
    rng = random.Random(f"portfolio:{seed}")
    names = _street_names(n_projects)
    projects: list[Project] = []
    child_counts: dict[str, int] = {}
    for row, (word, suffix) in enumerate(names):
        length = rng.uniform(60.0, 220.0)
        polyline = _street_polyline(row, length)
        segment = StreetSegment(
            segment_id=f"seg-{row:04d}",
            polyline=polyline,
            length_m=length,
            street_name=f"{word} {suffix}",
        )
        lines = rng.randint(*lines_range)
        n_children = _poisson(rng, (rng.paretovariate(1.2) - 1.0) * 1.5)
        value = sum(rng.uniform(0.5, 12.5) for _ in range(n_children))
        projects.append(Project(
            project_id=segment.segment_id,
            segment=segment,
            parcel_ids=frozenset(f"p-{row:04d}-{i:02d}" for i in range(lines)),
            value_exposure_years=value,
            cost_units=float(lines),
            lead_line_count=lines,
        ))
        child_counts[segment.segment_id] = n_children
    return projects, child_counts


def random_knapsack_instance(
    rng: random.Random,
    max_items: int = 15,
    integer_costs: bool = True,
    integer_values: bool = False,
    exact_items: bool = False,
) -> tuple[list[Project], float]:
    """Small random instance for solver benchmarks (uniform values/costs).

    Integer values keep subset sums exact in floating point, so dynamic
    programming and exhaustive enumeration can be compared with equality.
    """
    n = max_items if exact_items else rng.randint(1, max_items)
    projects = []
    for i in range(n):
        cost = float(rng.randint(1, 30)) if integer_costs else rng.uniform(0.5, 30.0)
        value = float(rng.randint(1, 100)) if integer_values else rng.uniform(1.0, 100.0)
        stub = StreetSegment(
            segment_id=f"k-{i:03d}",
            polyline=((0.0, 0.0), (0.001, 0.0)),
            length_m=111.0,
            street_name="BENCH ST",
        )
        projects.append(Project(
            project_id=f"k-{i:03d}",
            segment=stub,
            parcel_ids=frozenset(),
            value_exposure_years=value,
            cost_units=cost,
            lead_line_count=max(1, int(cost)),
        ))
    total_cost = sum(p.cost_units for p in projects)
    budget = float(int(rng.uniform(0.2, 0.8) * total_cost))
    return projects, budget


# --- noisy address corpus for linkage benchmarks ---

@dataclass
class TypoCorpus:
    records: list[tuple[str, str, str]]  # (dataset, key, raw text)
    truth: dict[str, str]  # record key -> expected place_id
    table: dict[str, GeoAddress]  # clean address text -> place


def make_typo_corpus(seed: int, size: int = 200, typo_rate: float = 0.10) -> TypoCorpus:
    """Unique addresses with a fraction of single-character name typos."""
    rng = random.Random(f"typos:{seed}")
    names = _street_names(40)
    corpus = TypoCorpus([], {}, {})
    used: set[tuple[int, int]] = set()
    for i in range(size):
        while True:
            street_idx = rng.randrange(len(names))
            number = rng.randint(1, 80)
            if (street_idx, number) not in used:
                used.add((street_idx, number))
                break
        word, suffix = names[street_idx]
        clean = f"{number} {word.title()} {suffix.title()}"
        place_id = f"place-{i:04d}"
        corpus.table[clean] = GeoAddress(
            place_id=place_id,
            point=(CITY_ORIGIN[0] + street_idx * 1e-3, CITY_ORIGIN[1] + number * 1e-5),
            street_number=str(number),
            route=f"{word.title()} {suffix}",
            formatted=clean,
        )
        raw = clean
        if rng.random() < typo_rate:
            raw = f"{number} {_inject_typo(rng, word.title())} {suffix.title()}"
        key = f"rec-{i:04d}"
        corpus.records.append(("students", key, raw))
        corpus.truth[key] = place_id
    return corpus


def _inject_typo(rng: random.Random, word: str) -> str:
    pos = rng.randrange(len(word))
    kind = rng.choice(("substitute", "delete", "insert"))
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    if kind == "substitute":
        replacement = rng.choice([ch for ch in alphabet if ch != word[pos].lower()])
        return word[:pos] + replacement + word[pos + 1:]
    if kind == "delete" and len(word) > 1:
        return word[:pos] + word[pos + 1:]
    return word[:pos] + rng.choice(alphabet) + word[pos:]
