import math

import numpy as np
import pytest

from stabilikit.errors import DegeneratePlacement, EmptyField
from stabilikit.geometry import Point2, Point3, contains_points, point_in_polygon
from stabilikit.pressure import (
    FootPlacement,
    LocalizedPressureField,
    PressureMap,
    base_of_support,
    bos_iou,
    center_of_pressure,
    localize_foot,
    localized_field,
)


def flat_map(side, rows=4, cols=3, cell=10.0, value=20.0, frame=0):
    return PressureMap(side, rows, cols, cell, np.full((rows, cols), value), frame)


def zero_map(side, rows=4, cols=3, cell=10.0, frame=0):
    return PressureMap(side, rows, cols, cell, np.zeros((rows, cols)), frame)


class TestLocalizeFoot:
    def test_axis_aligned(self):
        pm = flat_map("left")
        placement = localize_foot(pm, Point3(0, 0, 80), Point3(250, 0, 20))
        assert placement.heading == pytest.approx(0.0)
        # heel offset 40 back along -x, laterally centered: width 30 -> y -15
        assert placement.origin.x == pytest.approx(-40.0)
        assert placement.origin.y == pytest.approx(-15.0)

    def test_rotated_90(self):
        pm = flat_map("left")
        placement = localize_foot(pm, Point3(0, 0, 80), Point3(0, 250, 20))
        assert placement.heading == pytest.approx(math.pi / 2)

    def test_coincident_projection_raises(self):
        pm = flat_map("left")
        with pytest.raises(DegeneratePlacement):
            localize_foot(pm, Point3(0, 0, 80), Point3(0, 0, 20))

    def test_deterministic(self):
        pm = flat_map("right")
        a = localize_foot(pm, Point3(10, 20, 80), Point3(260, 30, 15))
        b = localize_foot(pm, Point3(10, 20, 80), Point3(260, 30, 15))
        assert a == b


class TestLocalizedField:
    def _placements(self):
        left = FootPlacement("left", Point2(-150, 0), 0.0)
        right = FootPlacement("right", Point2(150, 0), 0.0)
        return left, right

    def test_threshold_zero_counts_all_cells(self):
        lp, rp = self._placements()
        field = localized_field(flat_map("left"), lp, flat_map("right"), rp, threshold=0.0)
        assert field.n_samples == 2 * 4 * 3

    def test_threshold_above_max_raises(self):
        lp, rp = self._placements()
        with pytest.raises(EmptyField):
            localized_field(flat_map("left"), lp, flat_map("right"), rp, threshold=25.0)

    def test_two_point_loads_transform(self):
        lm = zero_map("left")
        rm = zero_map("right")
        lm.values[0, 0] = 30.0
        lm.values[3, 2] = 30.0
        rm.values[1, 1] = 30.0
        rm.values[2, 0] = 30.0
        lp = FootPlacement("left", Point2(0, 0), 0.0)
        rp = FootPlacement("right", Point2(100, 0), math.pi / 2)
        field = localized_field(lm, lp, rm, rp, threshold=10.0)
        assert field.n_samples == 4
        got = {tuple(np.round(p, 9)) for p in field.positions}
        # left, heading 0: world = origin + (x_local, y_local)
        want = {(5.0, 5.0), (35.0, 25.0)}
        # right, heading pi/2: world = origin + (-y_local, x_local)
        want |= {(100.0 - 15.0, 15.0), (100.0 - 5.0, 25.0)}
        assert got == want

    def test_strictly_above_threshold(self):
        lm = zero_map("left")
        lm.values[0, 0] = 10.0
        lm.values[0, 1] = 10.1
        lp, rp = self._placements()
        field = localized_field(lm, lp, zero_map("right"), rp, threshold=10.0)
        assert field.n_samples == 1


class TestCenterOfPressure:
    def test_equal_pressure_symmetry(self):
        f = LocalizedPressureField(0, [[0, 0], [100, 0]], [20, 20])
        assert center_of_pressure(f) == Point2(50, 0)

    def test_weighted_mean_2_to_1(self):
        f = LocalizedPressureField(0, [[0, 0], [90, 0]], [20, 10])
        assert center_of_pressure(f) == Point2(30, 0)

    def test_uniform_grid_centroid(self):
        pm = flat_map("left", rows=6, cols=4, cell=10.0)
        lp = FootPlacement("left", Point2(0, 0), 0.0)
        rp = FootPlacement("right", Point2(500, 0), 0.0)
        field = localized_field(pm, lp, flat_map("right", rows=6, cols=4), rp, threshold=5.0)
        cop = center_of_pressure(field)
        assert cop.x == pytest.approx((30.0 + 530.0) / 2)
        assert cop.y == pytest.approx(20.0)

    def test_cop_inside_bos(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            n = rng.integers(4, 30)
            f = LocalizedPressureField(
                0, rng.uniform(-100, 100, size=(n, 2)), rng.uniform(0.1, 50, size=n)
            )
            try:
                bos = base_of_support(f)
            except Exception:
                continue
            assert point_in_polygon(center_of_pressure(f), bos) != "outside"


class TestBaseOfSupport:
    def test_rectangle_corners(self):
        f = LocalizedPressureField(0, [[0, 0], [100, 0], [100, 300], [0, 300]], [1, 1, 1, 1])
        bos = base_of_support(f)
        assert bos.n_vertices == 4
        assert {(v.x, v.y) for v in bos.vertices} == {(0, 0), (100, 0), (100, 300), (0, 300)}

    def test_two_patches_hull_spans_both(self):
        lm = zero_map("left")
        rm = zero_map("right")
        lm.values[:2, :2] = 30.0
        rm.values[:2, :2] = 30.0
        lp = FootPlacement("left", Point2(0, 0), 0.0)
        rp = FootPlacement("right", Point2(200, 0), 0.0)
        field = localized_field(lm, lp, rm, rp, threshold=10.0)
        bos = base_of_support(field)
        assert field.n_samples == 8
        assert 3 <= bos.n_vertices <= 8
        assert contains_points(bos, field.positions).all()

    def test_single_foot_stance(self):
        lm = flat_map("left")
        lp = FootPlacement("left", Point2(0, 0), 0.0)
        rp = FootPlacement("right", Point2(200, 0), 0.0)
        field = localized_field(lm, lp, zero_map("right"), rp, threshold=5.0)
        bos = base_of_support(field)
        # all of one insole's active cell centers, none beyond its bounding box
        assert field.positions[:, 0].max() <= 40.0
        assert contains_points(bos, field.positions).all()


class TestBosIou:
    def _field_at(self, dx=0.0, dy=0.0, side_mm=100.0, n=5):
        xs = np.linspace(0, side_mm, n)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pos = np.column_stack([gx.ravel() + dx, gy.ravel() + dy])
        return LocalizedPressureField(0, pos, np.full(pos.shape[0], 10.0))

    def test_identical_fields(self):
        a = self._field_at()
        assert bos_iou(a, self._field_at()) == 1.0

    def test_disjoint(self):
        assert bos_iou(self._field_at(), self._field_at(dx=1000.0)) == 0.0

    def test_half_shift_square(self):
        side = 100.0
        got = bos_iou(self._field_at(), self._field_at(dx=side / 2), raster_cell=side / 200)
        assert got == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_symmetry(self):
        a, b = self._field_at(), self._field_at(dx=30.0, dy=20.0)
        assert bos_iou(a, b) == bos_iou(b, a)


class TestInvariantsProperties:
    def _stance_field(self, threshold, rng):
        lm = PressureMap("left", 6, 4, 12.0, rng.uniform(0, 40, size=(6, 4)))
        rm = PressureMap("right", 6, 4, 12.0, rng.uniform(0, 40, size=(6, 4)))
        lp = FootPlacement("left", Point2(-120, 0), 0.1)
        rp = FootPlacement("right", Point2(120, 0), -0.1)
        return localized_field(lm, lp, rm, rp, threshold=threshold)

    def test_threshold_monotonicity(self):
        for seed in range(10):
            low = self._stance_field(5.0, np.random.default_rng(seed))
            high = self._stance_field(15.0, np.random.default_rng(seed))
            assert high.n_samples <= low.n_samples
            bos_low = base_of_support(low)
            assert contains_points(bos_low, base_of_support(high).as_array()).all()

    def test_rigid_equivariance(self):
        lm = flat_map("left", value=25.0)
        rm = flat_map("right", value=25.0)
        lp = FootPlacement("left", Point2(-100, 0), 0.2)
        rp = FootPlacement("right", Point2(100, 0), -0.2)
        base_field = localized_field(lm, lp, rm, rp, threshold=10.0)
        cop0 = center_of_pressure(base_field).as_array()
        bos0 = base_of_support(base_field).as_array()

        angle, t = 0.5, np.array([50.0, -30.0])
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])

        def move(p: FootPlacement) -> FootPlacement:
            o = rot @ p.origin.as_array() + t
            h = p.heading + angle
            h = math.atan2(math.sin(h), math.cos(h))
            return FootPlacement(p.side, Point2(*o), h)

        moved = localized_field(lm, move(lp), rm, move(rp), threshold=10.0)
        cop1 = center_of_pressure(moved).as_array()
        assert np.allclose(cop1, rot @ cop0 + t, atol=1e-9)
        bos1 = base_of_support(moved).as_array()
        want = {tuple(np.round(rot @ v + t, 6)) for v in bos0}
        assert {tuple(np.round(v, 6)) for v in bos1} == want

    def test_pressure_scaling_invariance(self):
        rng = np.random.default_rng(4)
        pos = rng.uniform(-50, 50, size=(20, 2))
        p = rng.uniform(1, 30, size=20)
        f1 = LocalizedPressureField(0, pos, p)
        f2 = LocalizedPressureField(0, pos, 3.7 * p)
        assert np.allclose(
            center_of_pressure(f1).as_array(), center_of_pressure(f2).as_array(), atol=1e-9
        )
        assert bos_iou(f1, f2) == 1.0
