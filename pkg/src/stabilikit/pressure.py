"""Insole pressure handling: foot localization, composite fields, CoP, BoS.

The insole grid lives in a local frame with the x axis running heel to toe
along the grid's long (row) axis and the y axis 90 degrees counter-clockwise
from it. Cell (r, c) has its center at local ((r + 0.5) s, (c + 0.5) s) for
cell size s. A placement pins the grid's (0, 0) reference corner in the floor
plane and rotates the long axis to the heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateInput, DegeneratePlacement, EmptyField
from .geometry import ConvexPolygon, Point2, Point3, contains_points, convex_hull

# registration defaults: the heel edge of the grid sits this far behind the
# projected ankle along the foot axis, and the grid is centered laterally on
# the ankle-toe line
DEFAULT_HEEL_OFFSET_MM = 40.0
DEFAULT_MIN_FOOT_SPAN_MM = 50.0
DEFAULT_THRESHOLD_KPA = 10.0
DEFAULT_IOU_RASTER_MM = 5.0

Side = Literal["left", "right"]


@dataclass
class PressureMap:
    """Single insole grid of pressures (kPa) for one frame."""

    side: Side
    rows: int
    cols: int
    cell_size: float  # mm
    values: np.ndarray  # (rows, cols) kPa
    frame_index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(self.rows, self.cols)
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("pressures must be finite and >= 0")

    def cell_centers_local(self) -> np.ndarray:
        """(rows*cols, 2) local-frame cell centers, row-major order."""
        r = (np.arange(self.rows) + 0.5) * self.cell_size
        c = (np.arange(self.cols) + 0.5) * self.cell_size
        rr, cc = np.meshgrid(r, c, indexing="ij")
        return np.column_stack([rr.ravel(), cc.ravel()])


@dataclass(frozen=True)
class FootPlacement:
    """Floor-plane pose of one insole grid."""

    side: Side
    origin: Point2  # grid (0, 0) reference corner, mm
    heading: float  # long-axis direction, radians in (-pi, pi]

    def __post_init__(self):
        if not -math.pi < self.heading <= math.pi:
            raise ValueError(f"heading {self.heading} outside (-pi, pi]")

    def to_world(self, local_xy: np.ndarray) -> np.ndarray:
        c, s = math.cos(self.heading), math.sin(self.heading)
        rot = np.array([[c, -s], [s, c]])
        return np.asarray(local_xy) @ rot.T + self.origin.as_array()


@dataclass
class LocalizedPressureField:
    """World-frame pressure samples of both feet combined."""

    frame_index: int
    positions: np.ndarray  # (n, 2) mm
    pressures: np.ndarray  # (n,) kPa

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 2)
        self.pressures = np.asarray(self.pressures, dtype=np.float64).reshape(-1)
        if self.positions.shape[0] != self.pressures.shape[0]:
            raise ValueError("positions and pressures disagree in length")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("sample positions must be finite")
        if np.any(self.pressures < 0):
            raise ValueError("pressures must be >= 0")

    @property
    def n_samples(self) -> int:
        return self.positions.shape[0]

    def samples(self):
        """Iterate (Point2, pressure) pairs."""
        for xy, p in zip(self.positions, self.pressures):
            yield Point2(*xy), float(p)


def localize_foot(
    pressure: PressureMap,
    ankle: Point3,
    toe: Point3,
    *,
    heel_offset: float = DEFAULT_HEEL_OFFSET_MM,
    min_span: float = DEFAULT_MIN_FOOT_SPAN_MM,
) -> FootPlacement:
    """Place an insole grid on the floor from the ankle and toe joints.

    The heading is the floor-plane direction from ankle to toe; the grid's
    heel edge sits heel_offset behind the projected ankle and the grid is
    centered laterally on the ankle-toe line.
    """
    d = toe.as_array()[:2] - ankle.as_array()[:2]
    span = float(np.hypot(*d))
    if span < min_span:
        raise DegeneratePlacement(
            f"{pressure.side} foot: projected ankle-toe span {span:.1f} mm < {min_span} mm"
        )
    heading = math.atan2(d[1], d[0])
    u = np.array([math.cos(heading), math.sin(heading)])
    v = np.array([-math.sin(heading), math.cos(heading)])
    width = pressure.cols * pressure.cell_size
    origin = ankle.as_array()[:2] - heel_offset * u - 0.5 * width * v
    return FootPlacement(pressure.side, Point2(*origin), heading)


def localized_field(
    left: PressureMap,
    left_placement: FootPlacement,
    right: PressureMap,
    right_placement: FootPlacement,
    threshold: float = DEFAULT_THRESHOLD_KPA,
) -> LocalizedPressureField:
    """Merge both insoles into one world-frame sample list.

    Every cell strictly above the threshold contributes one sample at its
    cell-center world position. Raises EmptyField when nothing exceeds the
    threshold (airborne or invalid frame).
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    positions, pressures = [], []
    for pm, placement in ((left, left_placement), (right, right_placement)):
        flat = pm.values.ravel()
        mask = flat > threshold
        if mask.any():
            positions.append(placement.to_world(pm.cell_centers_local()[mask]))
            pressures.append(flat[mask])
    if not positions:
        raise EmptyField(f"no pressure cell exceeds {threshold} kPa")
    return LocalizedPressureField(
        frame_index=left.frame_index,
        positions=np.vstack(positions),
        pressures=np.concatenate(pressures),
    )


def center_of_pressure(field: LocalizedPressureField) -> Point2:
    """Pressure-weighted mean of all samples."""
    total = float(field.pressures.sum())
    if field.n_samples == 0 or total <= 0:
        raise EmptyField("cannot compute CoP of an empty field")
    cop = field.pressures @ field.positions / total
    return Point2(*cop)


def base_of_support(field: LocalizedPressureField) -> ConvexPolygon:
    """Convex hull of all contact sample positions."""
    if field.n_samples == 0:
        raise EmptyField("cannot compute BoS of an empty field")
    return convex_hull(field.positions)


def bos_iou(
    a: LocalizedPressureField,
    b: LocalizedPressureField,
    raster_cell: float = DEFAULT_IOU_RASTER_MM,
) -> float:
    """Intersection over union of the two fields' support hulls.

    Both hulls are rasterized onto a shared grid of pitch raster_cell covering
    the union's bounding box; the ratio is counted in cells.
    """
    hull_a = base_of_support(a)
    hull_b = base_of_support(b)
    pts = np.vstack([hull_a.as_array(), hull_b.as_array()])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    nx = max(1, int(math.ceil((hi[0] - lo[0]) / raster_cell)))
    ny = max(1, int(math.ceil((hi[1] - lo[1]) / raster_cell)))
    xs = lo[0] + (np.arange(nx) + 0.5) * raster_cell
    ys = lo[1] + (np.arange(ny) + 0.5) * raster_cell
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    in_a = contains_points(hull_a, grid)
    in_b = contains_points(hull_b, grid)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        raise DegenerateInput("both hulls rasterize to zero cells; raster too coarse")
    return float(np.count_nonzero(in_a & in_b) / union)
