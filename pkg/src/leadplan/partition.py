"""Street segmentation and parcel-to-segment assignment.

Centerlines are cut at intersections (shared vertices within a 0.5 m snap
tolerance), then any over-length piece is subdivided evenly so no candidate
project exceeds the configured cap. Parcels attach to the nearest segment
on their own street, falling back to the nearest segment overall.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import geo
from .errors import DegenerateGeometry
from .model import LeadStatusPolicy, Parcel, Project, ServiceLine, StreetSegment
from .scoring import lead_weight

SNAP_TOLERANCE_M = 0.5


def _node_key(point: geo.LatLon, ref: geo.LatLon) -> tuple[int, int]:
    x, y = geo.local_xy(point, ref)
    return round(x / SNAP_TOLERANCE_M), round(y / SNAP_TOLERANCE_M)


def split_streets(
    centerlines: Iterable[StreetSegment], max_len_m: float = 150.0
) -> list[StreetSegment]:
    """Cut centerlines into candidate project segments.

    Splits first at intersection vertices shared with another centerline,
    then subdivides any remaining piece longer than ``max_len_m`` into equal
    parts. Pre-segmented input below the cap passes through with its ids
    intact, so externally curated segmentations survive a round trip.
    """
    if max_len_m <= 0:
        raise ValueError("max_len_m must be > 0")
    lines = list(centerlines)
    if not lines:
        return []

    for line in lines:
        if geo.polyline_length_m(line.polyline) <= 0:
            raise DegenerateGeometry(f"zero-length centerline {line.segment_id!r}")
        if geo.polyline_self_intersects(line.polyline):
            raise DegenerateGeometry(f"self-intersecting centerline {line.segment_id!r}")

    ref = lines[0].polyline[0]
    touching: dict[tuple[int, int], set[str]] = {}
    for line in lines:
        for pt in line.polyline:
            touching.setdefault(_node_key(pt, ref), set()).add(line.segment_id)

    out: list[StreetSegment] = []
    for line in sorted(lines, key=lambda s: s.segment_id):
        pts = line.polyline
        cut_indices = [0]
        for i in range(1, len(pts) - 1):
            others = touching[_node_key(pts[i], ref)] - {line.segment_id}
            if others:
                cut_indices.append(i)
        cut_indices.append(len(pts) - 1)

        pieces: list[tuple[geo.LatLon, ...]] = []
        for a, b in zip(cut_indices, cut_indices[1:]):
            piece = pts[a: b + 1]
            if geo.polyline_length_m(piece) > 0:
                pieces.append(tuple(piece))

        subdivided: list[tuple[geo.LatLon, ...]] = []
        for piece in pieces:
            length = geo.polyline_length_m(piece)
            if length <= max_len_m * (1 + 1e-9):
                subdivided.append(piece)
                continue
            parts = math.ceil(length / max_len_m - 1e-9)
            for j in range(parts):
                chunk = geo.slice_polyline(
                    piece, length * j / parts, length * (j + 1) / parts
                )
                subdivided.append(tuple(chunk))

        if len(subdivided) == 1:
            out.append(StreetSegment(
                segment_id=line.segment_id,
                polyline=subdivided[0],
                length_m=geo.polyline_length_m(subdivided[0]),
                street_name=line.street_name,
            ))
        else:
            for k, piece in enumerate(subdivided):
                out.append(StreetSegment(
                    segment_id=f"{line.segment_id}-{k:02d}",
                    polyline=piece,
                    length_m=geo.polyline_length_m(piece),
                    street_name=line.street_name,
                ))
    return out


@dataclass
class AssignmentResult:
    assignment: dict[str, str] = field(default_factory=dict)  # parcel -> segment
    flagged: list[str] = field(default_factory=list)  # no street-name match


def assign_parcels(
    parcels: Iterable[Parcel], segments: Sequence[StreetSegment]
) -> AssignmentResult:
    """Attach each parcel to the closest segment on its own street.

    Candidates are segments whose normalized street name equals the
    parcel's route; with no name match the nearest segment overall wins and
    the parcel is flagged. Ties break toward the lower segment id.
    """
    if not segments:
        raise ValueError("segments must be non-empty")
    by_name: dict[str, list[StreetSegment]] = {}
    for seg in segments:
        by_name.setdefault(seg.street_name, []).append(seg)

    from .linkage import normalize_street_name

    result = AssignmentResult()
    for parcel in sorted(parcels, key=lambda p: p.parcel_id):
        route = parcel.address.route
        candidates: Sequence[StreetSegment] = ()
        if route:
            candidates = by_name.get(normalize_street_name(route), ())
        if not candidates:
            candidates = segments
            result.flagged.append(parcel.parcel_id)
        best = min(
            candidates,
            key=lambda s: (geo.point_to_polyline_m(parcel.centroid, s.polyline),
                           s.segment_id),
        )
        result.assignment[parcel.parcel_id] = best.segment_id
    return result


def build_projects(
    segments: Iterable[StreetSegment],
    parcel_assignment: Mapping[str, str],
    service_lines: Iterable[ServiceLine],
    parcels: Mapping[str, Parcel],
    policy: LeadStatusPolicy,
) -> list[Project]:
    """One candidate project per segment that has any lead-relevant line.

    ``lead_line_count`` counts sides (public or private) whose lead weight
    under the active policy is positive — a parcel lead on both sides
    contributes two, since replacements are priced per side.
    """
    lines_by_parcel = {ln.parcel_id: ln for ln in service_lines}
    members: dict[str, set[str]] = {}
    for parcel_id, segment_id in parcel_assignment.items():
        members.setdefault(segment_id, set()).add(parcel_id)

    projects: list[Project] = []
    for segment in sorted(segments, key=lambda s: s.segment_id):
        parcel_ids = members.get(segment.segment_id, set())
        lead_sides = 0
        relevant: set[str] = set()
        for parcel_id in parcel_ids:
            line = lines_by_parcel.get(parcel_id)
            parcel = parcels.get(parcel_id)
            if line is None or parcel is None:
                continue
            public_w, private_w = lead_weight(line, parcel, policy)
            sides = (public_w > 0) + (private_w > 0)
            if sides:
                lead_sides += sides
                relevant.add(parcel_id)
        if not relevant:
            continue
        projects.append(Project(
            project_id=segment.segment_id,
            segment=segment,
            parcel_ids=frozenset(parcel_ids),
            lead_line_count=lead_sides,
        ))
    return projects
