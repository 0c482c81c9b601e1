from __future__ import annotations

import math

import pytest

from leadplan.model import Project, StreetSegment


def make_project(pid: str, value: float, cost: float, lines: int = 1,
                 length: float = 100.0, street: str = "BENCH ST") -> Project:
    stub = StreetSegment(
        segment_id=pid,
        polyline=((0.0, 0.0), (length / 111_195.0, 0.0)),
        length_m=length,
        street_name=street,
    )
    return Project(
        project_id=pid,
        segment=stub,
        parcel_ids=frozenset(),
        value_exposure_years=value,
        cost_units=cost,
        lead_line_count=lines,
    )


def haversine_m(a, b) -> float:
    """Independent geodesic oracle for length checks."""
    r = 6_371_000.0
    lat1, lon1, lat2, lon2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    h = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 2 * r * math.asin(math.sqrt(h))


@pytest.fixture
def project_factory():
    return make_project
