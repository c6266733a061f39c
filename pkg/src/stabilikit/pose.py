"""Joint-set layouts, two-view triangulation, and hybrid pose assembly.

Four joint-set layouts are supported. The 12 limb joints common to all of
them occupy the first 12 slots of every layout, so the 25-joint hybrid set is
the 12 corrected joints plus the 13 remaining vision joints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import DegenerateGeometry, FrameMismatch, MissingObservation
from .geometry import Point3

# the 12 limb joints shared by every layout; order is part of the contract
COMMON_JOINTS = (
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
)

# 13 vision-only joints (head/face plus feet extremities)
VISION_EXTRA_JOINTS = (
    "nose",
    "neck",
    "mid_hip",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_big_toe",
    "left_small_toe",
    "left_heel",
    "right_big_toe",
    "right_small_toe",
    "right_heel",
)

# 9 mocap-only joints (trunk chain plus feet extremities)
MOCAP_EXTRA_JOINTS = (
    "pelvis",
    "spine",
    "thorax",
    "neck",
    "head",
    "left_toe",
    "right_toe",
    "left_heel",
    "right_heel",
)


@dataclass(frozen=True)
class JointSetLayout:
    """Named, ordered joint set. name is one of OP, GT, BP, HP."""

    name: str
    joints: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.joints)) != len(self.joints):
            raise ValueError(f"duplicate joint identifiers in layout {self.name}")

    def index(self, joint: str) -> int:
        return self.joints.index(joint)

    @property
    def n_joints(self) -> int:
        return len(self.joints)


LAYOUTS: dict[str, JointSetLayout] = {
    "BP": JointSetLayout("BP", COMMON_JOINTS),
    "OP": JointSetLayout("OP", COMMON_JOINTS + VISION_EXTRA_JOINTS),
    "HP": JointSetLayout("HP", COMMON_JOINTS + VISION_EXTRA_JOINTS),
    "GT": JointSetLayout("GT", COMMON_JOINTS + MOCAP_EXTRA_JOINTS),
}

# ankle/toe joints used to orient insole grids, per layout (the 12-joint set
# lacks foot extremities and cannot localize feet)
FOOT_JOINTS = {
    "GT": {"left": ("left_ankle", "left_toe"), "right": ("right_ankle", "right_toe")},
    "OP": {"left": ("left_ankle", "left_big_toe"), "right": ("right_ankle", "right_big_toe")},
    "HP": {"left": ("left_ankle", "left_big_toe"), "right": ("right_ankle", "right_big_toe")},
}


def layout(name: str) -> JointSetLayout:
    try:
        return LAYOUTS[name]
    except KeyError:
        raise KeyError(f"unknown layout {name!r}; expected one of {sorted(LAYOUTS)}") from None


@dataclass(frozen=True)
class CameraProjection:
    """3x4 projection matrix mapping world mm to homogeneous pixels."""

    camera_id: str
    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        if P.shape != (3, 4):
            raise ValueError(f"projection matrix must be 3x4, got {P.shape}")
        if np.linalg.matrix_rank(P) != 3:
            raise DegenerateGeometry(f"camera {self.camera_id}: projection matrix is rank-deficient")
        object.__setattr__(self, "P", P)

    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        _, _, vt = np.linalg.svd(self.P)
        c = vt[-1]
        if abs(c[3]) < 1e-12 * np.linalg.norm(c):
            raise DegenerateGeometry(f"camera {self.camera_id}: center at infinity")
        return c[:3] / c[3]

    def ray_direction(self, uv: np.ndarray) -> np.ndarray:
        """Unit direction of the viewing ray through pixel uv."""
        m = self.P[:, :3]
        d = np.linalg.solve(m, np.array([uv[0], uv[1], 1.0]))
        return d / np.linalg.norm(d)

    def project(self, xyz: np.ndarray) -> np.ndarray:
        """World point (mm) to pixel coordinates."""
        h = self.P @ np.append(np.asarray(xyz, dtype=np.float64), 1.0)
        return h[:2] / h[2]


@dataclass
class Pose2dFrame:
    """Per-camera 2D joint detections for one frame."""

    frame_index: int
    camera_id: str
    layout: JointSetLayout
    uv: np.ndarray  # (n_joints, 2) pixels
    confidence: np.ndarray  # (n_joints,) in [0, 1]
    valid: np.ndarray  # (n_joints,) bool

    def __post_init__(self):
        n = self.layout.n_joints
        self.uv = np.asarray(self.uv, dtype=np.float64).reshape(n, 2)
        self.confidence = np.asarray(self.confidence, dtype=np.float64).reshape(n)
        self.valid = np.asarray(self.valid, dtype=bool).reshape(n)
        if np.any((self.confidence < 0) | (self.confidence > 1)):
            raise ValueError("confidence values must lie in [0, 1]")


@dataclass
class Pose3dFrame:
    """3D pose for one frame; invalid joints carry no coordinate guarantees."""

    frame_index: int
    layout: JointSetLayout
    positions: np.ndarray  # (n_joints, 3) mm
    valid: np.ndarray  # (n_joints,) bool
    timestamp: float = 0.0

    def __post_init__(self):
        n = self.layout.n_joints
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(n, 3)
        self.valid = np.asarray(self.valid, dtype=bool).reshape(n)
        if not np.all(np.isfinite(self.positions[self.valid])):
            raise ValueError("valid joints must have finite coordinates")

    def joint(self, name: str) -> Point3:
        i = self.layout.index(name)
        if not self.valid[i]:
            raise MissingObservation(f"joint {name} is invalid in frame {self.frame_index}")
        return Point3(*self.positions[i])

    def joint_valid(self, name: str) -> bool:
        return bool(self.valid[self.layout.index(name)])


@dataclass(frozen=True)
class TriangulatedPoint:
    point: Point3
    residual_px: float  # RMS reprojection residual over the two views


def _conditioning_transform(uv: np.ndarray) -> np.ndarray:
    """Hartley-style conditioning for one observation.

    The full recipe (centroid to origin, isotropic scale to mean distance
    sqrt(2)) degenerates to a pure translation for a single point, which is
    the part that matters for the DLT system's conditioning.
    """
    return np.array([[1.0, 0.0, -uv[0]], [0.0, 1.0, -uv[1]], [0.0, 0.0, 1.0]])


def triangulate_joint(
    uv_a,
    cam_a: CameraProjection,
    uv_b,
    cam_b: CameraProjection,
    *,
    valid_a: bool = True,
    valid_b: bool = True,
    min_ray_angle_deg: float = 1.0,
) -> TriangulatedPoint:
    """Linear two-view DLT triangulation of a single joint.

    Solves the four projection constraints in conditioned coordinates and
    reports the RMS reprojection residual in original pixels. Raises
    MissingObservation for invalid inputs and DegenerateGeometry when the
    baseline is zero or the viewing rays are nearly parallel.
    """
    if not (valid_a and valid_b):
        raise MissingObservation("cannot triangulate an invalid 2D joint")
    uv_a = np.asarray(uv_a, dtype=np.float64).reshape(2)
    uv_b = np.asarray(uv_b, dtype=np.float64).reshape(2)

    baseline = np.linalg.norm(cam_a.center() - cam_b.center())
    if baseline < 1e-6:
        raise DegenerateGeometry("zero baseline between the two cameras")
    cos_angle = abs(float(np.dot(cam_a.ray_direction(uv_a), cam_b.ray_direction(uv_b))))
    angle = math.degrees(math.acos(min(1.0, cos_angle)))
    if angle < min_ray_angle_deg:
        raise DegenerateGeometry(f"viewing rays nearly parallel ({angle:.4f} deg)")

    rows = []
    for uv, cam in ((uv_a, cam_a), (uv_b, cam_b)):
        pc = _conditioning_transform(uv) @ cam.P  # observation maps to (0, 0)
        rows.append(-pc[0])
        rows.append(-pc[1])
    a = np.array(rows)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(a)
    x = vt[-1]
    if abs(x[3]) < 1e-12 * np.linalg.norm(x):
        raise DegenerateGeometry("triangulated point at infinity")
    xyz = x[:3] / x[3]

    res = [np.linalg.norm(cam.project(xyz) - uv) for uv, cam in ((uv_a, cam_a), (uv_b, cam_b))]
    return TriangulatedPoint(Point3(*xyz), float(np.sqrt(np.mean(np.square(res)))))


def triangulate_frame(
    frame_a: Pose2dFrame,
    frame_b: Pose2dFrame,
    cams: Mapping[str, CameraProjection],
    *,
    min_confidence: float = 0.1,
    min_ray_angle_deg: float = 1.0,
    sample_rate_hz: float = 5.0,
    residuals: Optional[np.ndarray] = None,
) -> Pose3dFrame:
    """Per-joint triangulation of a synchronized frame pair.

    A 3D joint is valid iff both 2D joints are valid, both confidences reach
    min_confidence, and triangulation succeeds. If residuals is given it is
    filled with per-joint reprojection residuals (NaN where invalid).
    """
    if frame_a.frame_index != frame_b.frame_index:
        raise FrameMismatch(
            f"frame index mismatch: {frame_a.frame_index} vs {frame_b.frame_index}"
        )
    if frame_a.layout.name != frame_b.layout.name:
        raise FrameMismatch(f"layout mismatch: {frame_a.layout.name} vs {frame_b.layout.name}")
    if frame_a.camera_id == frame_b.camera_id:
        raise FrameMismatch(f"both frames come from camera {frame_a.camera_id}")
    cam_a, cam_b = cams[frame_a.camera_id], cams[frame_b.camera_id]

    n = frame_a.layout.n_joints
    positions = np.full((n, 3), np.nan)
    valid = np.zeros(n, dtype=bool)
    if residuals is not None:
        residuals[:] = np.nan
    for j in range(n):
        if not (frame_a.valid[j] and frame_b.valid[j]):
            continue
        if frame_a.confidence[j] < min_confidence or frame_b.confidence[j] < min_confidence:
            continue
        try:
            tri = triangulate_joint(
                frame_a.uv[j], cam_a, frame_b.uv[j], cam_b, min_ray_angle_deg=min_ray_angle_deg
            )
        except DegenerateGeometry:
            continue
        positions[j] = tri.point.as_array()
        valid[j] = True
        if residuals is not None:
            residuals[j] = tri.residual_px
    return Pose3dFrame(
        frame_index=frame_a.frame_index,
        layout=frame_a.layout,
        positions=positions,
        valid=valid,
        timestamp=frame_a.frame_index / sample_rate_hz,
    )


def assemble_hybrid_pose(bp: Pose3dFrame, op: Pose3dFrame) -> Pose3dFrame:
    """Combine the 12 corrected joints with the 13 remaining vision joints.

    Pure selection: every output coordinate is copied bit-for-bit from one of
    the sources, as is its validity flag.
    """
    if bp.frame_index != op.frame_index:
        raise FrameMismatch(f"frame index mismatch: {bp.frame_index} vs {op.frame_index}")
    if bp.layout.name != "BP":
        raise FrameMismatch(f"expected BP layout for first argument, got {bp.layout.name}")
    if op.layout.name != "OP":
        raise FrameMismatch(f"expected OP layout for second argument, got {op.layout.name}")
    n_common = len(COMMON_JOINTS)
    positions = np.vstack([bp.positions, op.positions[n_common:]])
    valid = np.concatenate([bp.valid, op.valid[n_common:]])
    return Pose3dFrame(
        frame_index=bp.frame_index,
        layout=LAYOUTS["HP"],
        positions=positions,
        valid=valid,
        timestamp=bp.timestamp,
    )


def hip_center(pose: Pose3dFrame) -> Point3:
    """Midpoint of the left and right hip joints."""
    li, ri = pose.layout.index("left_hip"), pose.layout.index("right_hip")
    missing = [n for n, i in (("left_hip", li), ("right_hip", ri)) if not pose.valid[i]]
    if missing:
        raise MissingObservation(f"invalid hip joint(s): {', '.join(missing)}")
    mid = 0.5 * (pose.positions[li] + pose.positions[ri])
    return Point3(*mid)
