from __future__ import annotations

import random

import pytest

from leadplan import geo

from conftest import haversine_m


class TestDistance:
    def test_matches_haversine_at_city_scale(self):
        rng = random.Random("geo")
        for _ in range(200):
            a = (42.4 + rng.uniform(0, 0.05), -71.1 + rng.uniform(0, 0.05))
            b = (42.4 + rng.uniform(0, 0.05), -71.1 + rng.uniform(0, 0.05))
            fast = geo.distance_m(a, b)
            slow = haversine_m(a, b)
            if slow > 1.0:
                assert abs(fast - slow) / slow < 1e-3

    def test_zero_distance(self):
        p = (42.43, -71.05)
        assert geo.distance_m(p, p) == 0.0


class TestPointToPolyline:
    def test_perpendicular_foot_inside_segment(self):
        a, b = (42.43, -71.05), (42.43, -71.04)
        p = (42.4305, -71.045)
        d = geo.point_to_polyline_m(p, [a, b])
        assert d == pytest.approx(geo.distance_m((42.43, -71.045), p), rel=1e-6)

    def test_clamps_to_endpoint(self):
        a, b = (42.43, -71.05), (42.43, -71.049)
        p = (42.43, -71.06)  # west of the segment start
        d = geo.point_to_polyline_m(p, [a, b])
        assert d == pytest.approx(geo.distance_m(p, a), rel=1e-6)


class TestSlicePolyline:
    def test_slices_concatenate_to_whole(self):
        pts = [(42.43, -71.05), (42.431, -71.048), (42.4312, -71.045)]
        total = geo.polyline_length_m(pts)
        first = geo.slice_polyline(pts, 0, total / 3)
        second = geo.slice_polyline(pts, total / 3, 2 * total / 3)
        third = geo.slice_polyline(pts, 2 * total / 3, total)
        stitched = (geo.polyline_length_m(first) + geo.polyline_length_m(second)
                    + geo.polyline_length_m(third))
        assert stitched == pytest.approx(total, rel=1e-9)
        assert first[-1] == second[0]
        assert second[-1] == third[0]
        assert first[0] == pts[0]
        assert third[-1] == pts[-1]

    def test_preserves_interior_vertices(self):
        pts = [(42.43, -71.05), (42.431, -71.048), (42.4312, -71.045)]
        total = geo.polyline_length_m(pts)
        whole = geo.slice_polyline(pts, 0, total)
        assert whole == list(pts)


class TestSelfIntersection:
    def test_straight_line_clean(self):
        pts = [(42.43, -71.05), (42.431, -71.048), (42.432, -71.046)]
        assert not geo.polyline_self_intersects(pts)

    def test_bowtie_detected(self):
        pts = [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]
        assert geo.polyline_self_intersects(pts)

    def test_closed_ring_ok(self):
        pts = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0)]
        assert not geo.polyline_self_intersects(pts)
