"""2D/3D geometric primitives: convex hulls, signed distances, containment.

All coordinates are millimetres. Functions are pure and operate on immutable
values, so they are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence, Union

import numpy as np

from .errors import DegenerateInput, ShapeMismatch

# Geometric tolerance (mm) for degeneracy and boundary classification. Pressure
# grids and mocap data are orders of magnitude coarser, so real samples are
# never misclassified.
TAU_GEOM = 1e-9


@dataclass(frozen=True)
class Point2:
    """Floor-plane point (mm)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite Point2 ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


@dataclass(frozen=True)
class Point3:
    """World-space point (mm)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite Point3 ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def floor_projection(self) -> Point2:
        """Drop the vertical coordinate (floor is the z=0 plane)."""
        return Point2(self.x, self.y)


PointN = Union[Point2, Point3]


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with strictly counter-clockwise vertices (no collinear triples)."""

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise DegenerateInput(f"polygon needs >= 3 vertices, got {len(self.vertices)}")
        arr = np.array([[v.x, v.y] for v in self.vertices], dtype=np.float64)
        nxt = np.roll(arr, -1, axis=0)
        edges = nxt - arr
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        lens = np.linalg.norm(edges, axis=1)
        # strict convexity: consecutive edges always turn left by more than tolerance
        tol = TAU_GEOM * (lens + np.roll(lens, -1))
        if np.any(cross <= tol):
            raise DegenerateInput("vertices are not in strictly convex CCW order")
        object.__setattr__(self, "_array", arr)

    def as_array(self) -> np.ndarray:
        """Vertices as an (n, 2) float array."""
        return self._array

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def area(self) -> float:
        a = self._array
        b = np.roll(a, -1, axis=0)
        return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]))


def _as_xy_array(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=np.float64)
    else:
        arr = np.array(
            [[p.x, p.y] if isinstance(p, Point2) else [p[0], p[1]] for p in points],
            dtype=np.float64,
        ).reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ShapeMismatch(f"expected (n, 2) points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite coordinates in point set")
    return arr


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Union[Sequence[Point2], Iterable, np.ndarray]) -> ConvexPolygon:
    """Minimal convex polygon containing all points (Andrew monotone chain).

    Duplicates are removed by exact coordinate equality and collinear boundary
    points are dropped, so the result is strictly convex. Raises
    DegenerateInput for < 3 distinct points or an all-collinear set.
    """
    arr = _as_xy_array(points)
    deduped = np.unique(arr, axis=0)  # dedupe exact duplicates; sorts lexicographically
    if deduped.shape[0] < 3:
        raise DegenerateInput(f"need >= 3 distinct points, got {deduped.shape[0]}")
    pts = [(float(x), float(y)) for x, y in deduped]  # plain floats: fast inner loop

    def build(seq):
        chain: list[tuple[float, float]] = []
        for p in seq:
            while len(chain) >= 2:
                ax, ay = chain[-2]
                bx, by = chain[-1]
                e1x, e1y = bx - ax, by - ay
                e2x, e2y = p[0] - bx, p[1] - by
                c = e1x * e2y - e1y * e2x
                tol = TAU_GEOM * (math.hypot(e1x, e1y) + math.hypot(e2x, e2y))
                if c <= tol:  # non-left turn or collinear: drop middle point
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("all points are collinear")
    return ConvexPolygon(tuple(Point2(p[0], p[1]) for p in hull))


def _segment_distances(p: np.ndarray, poly: ConvexPolygon) -> np.ndarray:
    """Distance from p to every boundary segment."""
    a = poly.as_array()
    b = np.roll(a, -1, axis=0)
    e = b - a
    ap = p[None, :] - a
    t = np.clip(np.einsum("ij,ij->i", ap, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    foot = a + t[:, None] * e
    return np.linalg.norm(p[None, :] - foot, axis=1)


def _edge_line_distances(p: np.ndarray, poly: ConvexPolygon) -> np.ndarray:
    """Signed distance from p to each edge line (positive on the interior side)."""
    a = poly.as_array()
    b = np.roll(a, -1, axis=0)
    e = b - a
    lens = np.linalg.norm(e, axis=1)
    cross = e[:, 0] * (p[1] - a[:, 1]) - e[:, 1] * (p[0] - a[:, 0])
    return cross / lens


def signed_distance_to_boundary(p: Point2, poly: ConvexPolygon) -> float:
    """Shortest distance from p to the polygon boundary, signed.

    Positive if p is strictly inside, negative if strictly outside, exactly
    0.0 when within TAU_GEOM of the boundary.
    """
    pa = p.as_array()
    d = float(np.min(_segment_distances(pa, poly)))
    if d <= TAU_GEOM:
        return 0.0
    inside = bool(np.all(_edge_line_distances(pa, poly) > 0.0))
    return d if inside else -d


Containment = Literal["inside", "boundary", "outside"]


def point_in_polygon(p: Point2, poly: ConvexPolygon) -> Containment:
    """Classify p against the polygon, consistent with signed_distance_to_boundary."""
    s = signed_distance_to_boundary(p, poly)
    if s == 0.0:
        return "boundary"
    return "inside" if s > 0.0 else "outside"


def contains_points(poly: ConvexPolygon, points: np.ndarray) -> np.ndarray:
    """Vectorized inside-or-boundary test for an (n, 2) array of points."""
    pts = _as_xy_array(points)
    a = poly.as_array()
    b = np.roll(a, -1, axis=0)
    e = b - a
    lens = np.linalg.norm(e, axis=1)
    # signed distance of every point to every edge line: (n_pts, n_edges)
    cross = np.subtract.outer(pts[:, 0], a[:, 0]) * (-e[:, 1])[None, :] + np.subtract.outer(
        pts[:, 1], a[:, 1]
    ) * e[:, 0][None, :]
    sd = cross / lens[None, :]
    return np.all(sd >= -TAU_GEOM, axis=1)


def euclidean_distance(a: PointN, b: PointN) -> float:
    """l2 distance between two points of the same dimensionality (mm)."""
    av, bv = a.as_array(), b.as_array()
    if av.shape != bv.shape:
        raise ShapeMismatch(f"dimensionality mismatch: {av.shape[0]}D vs {bv.shape[0]}D")
    return float(np.linalg.norm(av - bv))
