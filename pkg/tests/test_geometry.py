import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabilikit.errors import DegenerateInput, ShapeMismatch
from stabilikit.geometry import (
    TAU_GEOM,
    ConvexPolygon,
    Point2,
    Point3,
    contains_points,
    convex_hull,
    euclidean_distance,
    point_in_polygon,
    signed_distance_to_boundary,
)


def square(side=1.0):
    return ConvexPolygon(
        (Point2(0, 0), Point2(side, 0), Point2(side, side), Point2(0, side))
    )


def brute_force_hull_vertices(pts: np.ndarray) -> set:
    """O(n^3) hull oracle: a point is a hull vertex iff it is not inside/on the
    triangle of any three other points, and not strictly between two points."""
    pts = np.unique(pts, axis=0)
    n = len(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    verts = set()
    for i in range(n):
        p = pts[i]
        extreme = True
        for j in range(n):
            if not extreme:
                break
            for k in range(j + 1, n):
                if not extreme:
                    break
                for l in range(k + 1, n):
                    if i in (j, k, l):
                        continue
                    a, b, c = pts[j], pts[k], pts[l]
                    d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
                    if (d1 >= 0 and d2 >= 0 and d3 >= 0) or (d1 <= 0 and d2 <= 0 and d3 <= 0):
                        extreme = False
                        break
        if extreme:
            verts.add((float(p[0]), float(p[1])))
    return verts


def rigid_transform(pts: np.ndarray, angle: float, t: np.ndarray) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    r = np.array([[c, -s], [s, c]])
    return pts @ r.T + t


class TestConvexHull:
    def test_interior_point_dropped(self):
        pts = [Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1), Point2(0.5, 0.5)]
        hull = convex_hull(pts)
        assert hull.n_vertices == 4
        assert {(v.x, v.y) for v in hull.vertices} == {(0, 0), (1, 0), (1, 1), (0, 1)}

    def test_duplicate_removal(self):
        hull = convex_hull([Point2(0, 0), Point2(2, 0), Point2(1, 1), Point2(0, 0)])
        assert hull.n_vertices == 3

    def test_ccw_order_starts_lexicographic_min(self):
        hull = convex_hull([Point2(1, 0), Point2(0, 1), Point2(0, 0), Point2(1, 1)])
        assert (hull.vertices[0].x, hull.vertices[0].y) == (0, 0)
        assert hull.area() > 0

    def test_collinear_raises(self):
        with pytest.raises(DegenerateInput):
            convex_hull([Point2(0, 0), Point2(1, 1), Point2(2, 2), Point2(3, 3)])

    def test_too_few_distinct_raises(self):
        with pytest.raises(DegenerateInput):
            convex_hull([Point2(0, 0), Point2(1, 1), Point2(0, 0)])

    def test_random_disk_points_all_contained(self):
        rng = np.random.default_rng(7)
        theta = rng.uniform(0, 2 * math.pi, 200)
        r = np.sqrt(rng.uniform(0, 1, 200))
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        hull = convex_hull(pts)
        assert contains_points(hull, pts).all()
        for p in pts:
            assert point_in_polygon(Point2(*p), hull) != "outside"

    def test_matches_brute_force_small_sets(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = rng.integers(3, 13)
            pts = rng.uniform(-10, 10, size=(n, 2))
            try:
                hull = convex_hull(pts)
            except DegenerateInput:
                continue
            got = {(v.x, v.y) for v in hull.vertices}
            assert got == brute_force_hull_vertices(pts)

    def test_idempotence(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(50, 2))
        h1 = convex_hull(pts)
        h2 = convex_hull(h1.as_array())
        assert [(v.x, v.y) for v in h1.vertices] == [(v.x, v.y) for v in h2.vertices]

    def test_rigid_equivariance(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-100, 100, size=(40, 2))
        angle, t = 0.7, np.array([12.0, -3.0])
        h_then_t = rigid_transform(convex_hull(pts).as_array(), angle, t)
        t_then_h = convex_hull(rigid_transform(pts, angle, t)).as_array()
        got = {tuple(np.round(p, 6)) for p in h_then_t}
        want = {tuple(np.round(p, 6)) for p in t_then_h}
        assert got == want

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.floats(-1e3, 1e3, allow_nan=False), st.floats(-1e3, 1e3, allow_nan=False)
            ),
            min_size=3,
            max_size=40,
        )
    )
    def test_hull_contains_inputs_property(self, raw):
        pts = np.array(raw)
        try:
            hull = convex_hull(pts)
        except DegenerateInput:
            return
        assert contains_points(hull, pts).all()


class TestSignedDistance:
    def test_center_of_unit_square(self):
        assert signed_distance_to_boundary(Point2(0.5, 0.5), square()) == pytest.approx(0.5)

    def test_exterior_point(self):
        assert signed_distance_to_boundary(Point2(2.0, 0.5), square()) == pytest.approx(-1.0)

    def test_near_top_edge(self):
        assert signed_distance_to_boundary(Point2(0.3, 0.9), square()) == pytest.approx(0.1)

    def test_on_boundary_is_zero(self):
        assert signed_distance_to_boundary(Point2(1.0, 0.5), square()) == 0.0

    def test_exterior_nearest_vertex(self):
        d = signed_distance_to_boundary(Point2(2.0, 2.0), square())
        assert d == pytest.approx(-math.sqrt(2.0))

    def test_sign_matches_point_in_polygon(self):
        rng = np.random.default_rng(19)
        poly = convex_hull(rng.uniform(-50, 50, size=(25, 2)))
        for p in rng.uniform(-80, 80, size=(300, 2)):
            s = signed_distance_to_boundary(Point2(*p), poly)
            c = point_in_polygon(Point2(*p), poly)
            if s > 0:
                assert c == "inside"
            elif s < 0:
                assert c == "outside"
            else:
                assert c == "boundary"

    def test_dense_boundary_oracle(self):
        rng = np.random.default_rng(23)
        poly = convex_hull(rng.uniform(0, 1, size=(30, 2)))
        verts = poly.as_array()
        samples = []
        for a, b in zip(verts, np.roll(verts, -1, axis=0)):
            t = np.linspace(0, 1, 4000)[:, None]
            samples.append(a[None, :] * (1 - t) + b[None, :] * t)
        boundary = np.vstack(samples)
        for p in rng.uniform(-0.3, 1.3, size=(40, 2)):
            got = signed_distance_to_boundary(Point2(*p), poly)
            oracle = float(np.min(np.linalg.norm(boundary - p[None, :], axis=1)))
            if abs(got) < 0.01:
                continue  # sampling resolution insufficient close to the border
            assert abs(abs(got) - oracle) < 1e-6


class TestPointInPolygon:
    def test_inside(self):
        assert point_in_polygon(Point2(0.5, 0.5), square()) == "inside"

    def test_boundary(self):
        assert point_in_polygon(Point2(1.0, 0.5), square()) == "boundary"

    def test_outside(self):
        assert point_in_polygon(Point2(1.1, 0.5), square()) == "outside"


class TestEuclideanDistance:
    def test_3_4_5(self):
        assert euclidean_distance(Point2(0, 0), Point2(3, 4)) == 5.0

    def test_identity(self):
        assert euclidean_distance(Point3(1, 2, 3), Point3(1, 2, 3)) == 0.0

    def test_integer_norm_3d(self):
        assert euclidean_distance(Point3(1, 2, 2), Point3(0, 0, 0)) == 3.0

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatch):
            euclidean_distance(Point2(0, 0), Point3(0, 0, 0))

    @settings(max_examples=50, deadline=None)
    @given(
        st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)),
        st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)),
    )
    def test_symmetry_nonnegativity(self, a, b):
        pa, pb = Point2(*a), Point2(*b)
        assert euclidean_distance(pa, pb) == euclidean_distance(pb, pa) >= 0


class TestInvariants:
    def test_polygon_rejects_cw(self):
        with pytest.raises(DegenerateInput):
            ConvexPolygon((Point2(0, 0), Point2(0, 1), Point2(1, 1), Point2(1, 0)))

    def test_polygon_rejects_collinear_triple(self):
        with pytest.raises(DegenerateInput):
            ConvexPolygon((Point2(0, 0), Point2(1, 0), Point2(2, 0), Point2(1, 1)))

    def test_point_rejects_nan(self):
        with pytest.raises(ValueError):
            Point2(float("nan"), 0.0)
        with pytest.raises(ValueError):
            Point3(0.0, float("inf"), 0.0)

    def test_tau_geom_is_small(self):
        assert TAU_GEOM == 1e-9
