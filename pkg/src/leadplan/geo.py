"""Small-footprint planar geometry over WGS84 points.

City-scale distances use an equirectangular local approximation (error well
under 0.1% at these extents), which keeps everything dependency-free and
fast. Points are (lat, lon) tuples in degrees throughout.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

LatLon = tuple[float, float]

EARTH_RADIUS_M = 6_371_000.0
_DEG = math.pi / 180.0


def local_xy(point: LatLon, ref: LatLon) -> tuple[float, float]:
    """Project a point into meters on a plane tangent near ``ref``."""
    lat, lon = point
    rlat, rlon = ref
    x = (lon - rlon) * _DEG * EARTH_RADIUS_M * math.cos(rlat * _DEG)
    y = (lat - rlat) * _DEG * EARTH_RADIUS_M
    return x, y


def distance_m(a: LatLon, b: LatLon) -> float:
    """Equirectangular distance in meters."""
    mean_lat = 0.5 * (a[0] + b[0])
    dx = (b[1] - a[1]) * _DEG * EARTH_RADIUS_M * math.cos(mean_lat * _DEG)
    dy = (b[0] - a[0]) * _DEG * EARTH_RADIUS_M
    return math.hypot(dx, dy)


def polyline_length_m(points: Sequence[LatLon]) -> float:
    return sum(distance_m(points[i], points[i + 1]) for i in range(len(points) - 1))


def point_to_segment_m(p: LatLon, a: LatLon, b: LatLon) -> float:
    """Perpendicular (clamped) distance from p to segment ab, in meters."""
    px, py = local_xy(p, a)
    bx, by = local_xy(b, a)
    seg_len2 = bx * bx + by * by
    if seg_len2 == 0.0:
        return math.hypot(px, py)
    t = max(0.0, min(1.0, (px * bx + py * by) / seg_len2))
    return math.hypot(px - t * bx, py - t * by)


def point_to_polyline_m(p: LatLon, polyline: Sequence[LatLon]) -> float:
    return min(
        point_to_segment_m(p, polyline[i], polyline[i + 1])
        for i in range(len(polyline) - 1)
    )


def interpolate(a: LatLon, b: LatLon, t: float) -> LatLon:
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def slice_polyline(points: Sequence[LatLon], d0: float, d1: float) -> list[LatLon]:
    """Sub-polyline between arc-length offsets d0 < d1 (meters from start).

    Offsets are clamped to the polyline length; original vertices strictly
    inside the window are preserved so slices concatenate back to the input
    geometry exactly.
    """
    total = polyline_length_m(points)
    d0 = max(0.0, min(d0, total))
    d1 = max(d0, min(d1, total))
    out: list[LatLon] = []
    walked = 0.0
    for i in range(len(points) - 1):
        a, b = points[i], points[i + 1]
        step = distance_m(a, b)
        if step == 0.0:
            continue
        start, end = walked, walked + step
        if end < d0 or start > d1:
            walked = end
            continue
        ta = max(0.0, (d0 - start) / step)
        tb = min(1.0, (d1 - start) / step)
        pa = a if ta == 0.0 else interpolate(a, b, ta)
        pb = b if tb == 1.0 else interpolate(a, b, tb)
        if not out:
            out.append(pa)
        elif out[-1] != pa:
            out.append(pa)
        if pb != out[-1]:
            out.append(pb)
        walked = end
    if len(out) < 2:  # degenerate window; emit a zero-ish stub at the offset
        out = [points[0], points[-1]] if total == 0 else out
    return out


def segments_properly_intersect(p1: LatLon, p2: LatLon, q1: LatLon, q2: LatLon) -> bool:
    """True when open segments p1p2 and q1q2 cross at an interior point."""

    def orient(a: LatLon, b: LatLon, c: LatLon) -> float:
        return (b[1] - a[1]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[1] - a[1])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and all(
        d != 0 for d in (d1, d2, d3, d4)
    )


def polyline_self_intersects(points: Sequence[LatLon]) -> bool:
    n = len(points) - 1
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1 and points[0] == points[-1]:
                continue  # closed ring sharing its endpoint is fine
            if segments_properly_intersect(
                points[i], points[i + 1], points[j], points[j + 1]
            ):
                return True
    return False


def bounding_box(points: Iterable[LatLon]) -> tuple[float, float, float, float]:
    """(min_lat, min_lon, max_lat, max_lon) over the points."""
    lats, lons = [], []
    for lat, lon in points:
        lats.append(lat)
        lons.append(lon)
    return min(lats), min(lons), max(lats), max(lons)


def shoelace_centroid(ring: Sequence[LatLon]) -> LatLon:
    """Area-weighted centroid of a simple polygon ring (planar lat/lon).

    Works in coordinates relative to the first vertex — the raw shoelace
    sum cancels catastrophically for small parcels far from the origin.
    Falls back to the vertex mean for zero-area rings.
    """
    pts = list(ring)
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    lat0, lon0 = pts[0]
    twice_area = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(len(pts) - 1):
        y0, x0 = pts[i][0] - lat0, pts[i][1] - lon0
        y1, x1 = pts[i + 1][0] - lat0, pts[i + 1][1] - lon0
        cross = x0 * y1 - x1 * y0
        twice_area += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if abs(twice_area) < 1e-18:
        lat = sum(p[0] for p in pts[:-1]) / (len(pts) - 1)
        lon = sum(p[1] for p in pts[:-1]) / (len(pts) - 1)
        return lat, lon
    area6 = 3.0 * twice_area
    return lat0 + cy / area6, lon0 + cx / area6
