"""Deterministic synthetic data generator with analytically known answers.

Produces articulated pose sequences, two-camera projections, and physically
consistent insole pressure maps for a small family of motion programs. Every
frame carries the exact CoM (segmental model over the generated joints) plus
the CoP and support hull of the generated pressure at a reference threshold,
so the full pipeline can be checked end to end at desk scale.

The skeleton is a stick figure driven by a few smooth parameters (pelvis
offset, crouch, lean, arm swing, foot lift). Foot placements are laid down
first and ankle/toe joints are derived by inverting the foot localization,
which closes the loop between joint-driven localization and the generated
pressure grids. Generation is pure given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dempster import ComModel, dempster_com, load_com_model
from .errors import InvalidProgram
from .geometry import ConvexPolygon, Point2, Point3
from .pose import (
    COMMON_JOINTS,
    LAYOUTS,
    CameraProjection,
    Pose2dFrame,
    Pose3dFrame,
    assemble_hybrid_pose,
    triangulate_frame,
)
from .pressure import (
    DEFAULT_HEEL_OFFSET_MM,
    FootPlacement,
    PressureMap,
    base_of_support,
    center_of_pressure,
    localize_foot,
    localized_field,
)
from .stability import TakeStreams

GRAVITY_M_S2 = 9.81
MOTION_PROGRAMS = ("static", "sway", "weight_shift", "single_support_lift", "lunge")


@dataclass(frozen=True)
class InsoleSpec:
    rows: int = 16
    cols: int = 6
    cell_size: float = 15.0  # mm

    @property
    def length(self) -> float:
        return self.rows * self.cell_size

    @property
    def width(self) -> float:
        return self.cols * self.cell_size


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian degradation per data channel; zero magnitudes are identity."""

    pixels_2d: float = 0.0  # px on 2D detections
    joints_mm: float = 0.0  # mm on 3D joints
    pressure_kpa: float = 0.0  # kPa on pressure cells, clamped at 0
    dropout_rate: float = 0.0  # probability of masking a 2D joint invalid
    seed: int = 0

    def is_identity(self) -> bool:
        return (
            self.pixels_2d == 0.0
            and self.joints_mm == 0.0
            and self.pressure_kpa == 0.0
            and self.dropout_rate == 0.0
        )


@dataclass(frozen=True)
class SubjectBody:
    """Per-subject anthropometry; spans are standard fractions of height."""

    height_mm: float
    mass_kg: float

    @property
    def ankle_z(self):
        return 0.039 * self.height_mm

    @property
    def hip_z(self):
        return 0.530 * self.height_mm

    @property
    def shoulder_z(self):
        return 0.818 * self.height_mm

    @property
    def hip_sep(self):
        return 0.191 * self.height_mm

    @property
    def shoulder_sep(self):
        return 0.259 * self.height_mm

    @property
    def foot_span(self):
        return 0.120 * self.height_mm  # ankle to big toe, floor projection

    @property
    def upper_arm(self):
        return 0.186 * self.height_mm

    @property
    def forearm(self):
        return 0.146 * self.height_mm

    @property
    def weight_n(self):
        return self.mass_kg * GRAVITY_M_S2


def body_for_subject(index: int, n_subjects: int = 10) -> SubjectBody:
    """Deterministic anthropometry covering a 1.54-1.80 m, 52.5-77.1 kg range."""
    frac = (index % n_subjects) / max(1, n_subjects - 1)
    return SubjectBody(height_mm=1540.0 + 260.0 * frac, mass_kg=52.5 + 24.6 * frac)


def look_at_camera(camera_id, position, target, f=1250.0, pp=(960.0, 540.0)) -> CameraProjection:
    position = np.asarray(position, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    fwd = target - position
    fwd /= np.linalg.norm(fwd)
    right = np.cross(fwd, np.array([0.0, 0.0, 1.0]))
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    k = np.array([[f, 0.0, pp[0]], [0.0, f, pp[1]], [0.0, 0.0, 1.0]])
    r = np.vstack([right, down, fwd])
    return CameraProjection(camera_id, k @ np.hstack([r, (-r @ position)[:, None]]))


@dataclass
class SynthRig:
    """Two calibrated cameras, the floor plane z=0, an insole spec and a CoM model."""

    cameras: tuple
    insole: InsoleSpec
    com_model: ComModel
    seed: int = 0
    sample_rate: float = 5.0
    heel_offset: float = DEFAULT_HEEL_OFFSET_MM
    reference_threshold: float = 10.0  # kPa used for the stored analytic CoP/BoS


def default_rig(seed: int = 0, sample_rate: float = 5.0) -> SynthRig:
    cams = (
        look_at_camera("cam_a", (-1300.0, -2900.0, 1750.0), (0.0, 0.0, 900.0)),
        look_at_camera("cam_b", (1300.0, -2900.0, 1750.0), (0.0, 0.0, 900.0)),
    )
    return SynthRig(
        cameras=cams,
        insole=InsoleSpec(),
        com_model=load_com_model(layout_name="GT"),
        seed=seed,
        sample_rate=sample_rate,
    )


@dataclass
class SynthFrame:
    index: int
    timestamp: float
    gt_pose: Pose3dFrame  # GT layout
    bp_pose: Pose3dFrame  # BP layout, the 12 common joints copied from GT
    op_pose3d: Pose3dFrame  # OP layout body points used for projection
    pose2d: dict  # camera_id -> Pose2dFrame (OP layout)
    pressure_left: PressureMap
    pressure_right: PressureMap
    com: Point3  # analytic, segmental model over gt_pose
    cop: Point2  # analytic, at the rig's reference threshold
    bos: ConvexPolygon
    grounded_left: bool
    grounded_right: bool
    placements: dict  # side -> FootPlacement realized by the generated joints


@dataclass
class SynthTake:
    subject_id: str
    take_id: str
    program: str
    sample_rate: float
    body: SubjectBody
    reference_threshold: float
    frames: list

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def _smoothstep(x: float) -> float:
    x = min(1.0, max(0.0, x))
    return x * x * (3.0 - 2.0 * x)


def _foot_layout(program: str, body: SubjectBody) -> dict:
    """Static floor-plane placement of both feet for a program (centers + headings)."""
    half = 0.11 * body.height_mm
    feet = {
        "left": {"center": np.array([-half, 0.0]), "heading": math.pi / 2 + 0.08},
        "right": {"center": np.array([half, 0.0]), "heading": math.pi / 2 - 0.08},
    }
    if program == "lunge":
        feet["right"]["center"] = np.array([half * 0.8, 0.30 * body.height_mm])
        feet["right"]["heading"] = math.pi / 2 - 0.04
    return feet


@dataclass
class _ProgramState:
    pelvis_xy: np.ndarray
    crouch: float = 0.0  # mm pelvis drop
    lean_forward: float = 0.0  # rad about the lateral axis
    lean_lateral: float = 0.0  # rad about the forward axis
    arm_swing: float = 0.0  # rad, alternating arm phase
    lift_left: float = 0.0  # 0 grounded .. 1 fully lifted
    lift_right: float = 0.0
    front_bias: float = 0.0  # shifts pressure blobs along the foot axis, [-1, 1]


def _program_state(program: str, t: float, duration: float, feet: dict) -> _ProgramState:
    mid = 0.5 * (feet["left"]["center"] + feet["right"]["center"])
    state = _ProgramState(pelvis_xy=mid.copy())
    if program == "static":
        pass
    elif program == "sway":
        state.pelvis_xy = mid + np.array(
            [
                35.0 * math.sin(2.0 * math.pi * 0.25 * t),
                15.0 * math.sin(2.0 * math.pi * 0.13 * t),
            ]
        )
        state.lean_lateral = 0.04 * math.sin(2.0 * math.pi * 0.25 * t)
        state.front_bias = 0.3 * math.sin(2.0 * math.pi * 0.13 * t)
        state.arm_swing = 0.25 * math.sin(2.0 * math.pi * 0.2 * t)
    elif program == "weight_shift":
        s = _smoothstep(t / duration)
        left, right = feet["left"]["center"], feet["right"]["center"]
        state.pelvis_xy = left + s * (right - left)
    elif program == "single_support_lift":
        phase = t / duration
        left = feet["left"]["center"]
        over = _smoothstep(phase / 0.25) if phase < 0.75 else 1.0 - _smoothstep((phase - 0.75) / 0.25)
        state.pelvis_xy = mid + over * (left - mid)
        if 0.30 <= phase <= 0.70:
            state.lift_right = _smoothstep((phase - 0.30) / 0.10) * _smoothstep((0.70 - phase) / 0.10)
        state.crouch = 25.0 * over
        state.lean_lateral = -0.05 * over
    elif program == "lunge":
        s = _smoothstep(min(1.0, 2.0 * t / duration))
        state.pelvis_xy = mid + np.array([0.0, 25.0 * s])
        state.crouch = 70.0 * s
        state.lean_forward = 0.12 * s
        state.front_bias = 0.4 * s
    else:
        raise InvalidProgram(
            f"unknown motion program {program!r}; expected one of {MOTION_PROGRAMS}"
        )
    return state


def _rotation(lean_forward: float, lean_lateral: float) -> np.ndarray:
    ca, sa = math.cos(lean_forward), math.sin(lean_forward)
    cb, sb = math.cos(lean_lateral), math.sin(lean_lateral)
    rx = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]], dtype=np.float64)
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]], dtype=np.float64)
    return rx @ ry


def _foot_joints(side, feet, body, insole, heel_offset, lift):
    """Ankle/toe/heel/small-toe world joints realizing the side's placement."""
    entry = feet[side]
    theta = entry["heading"]
    u = np.array([math.cos(theta), math.sin(theta)])
    v = np.array([-math.sin(theta), math.cos(theta)])
    center = entry["center"]
    ankle_xy = center - (insole.length / 2.0 - heel_offset) * u
    toe_xy = ankle_xy + body.foot_span * u
    heel_xy = ankle_xy - 0.045 * body.height_mm * u
    outward = v if side == "left" else -v
    small_toe_xy = toe_xy - 20.0 * u + 30.0 * outward
    dz = 150.0 * lift
    return {
        "ankle": np.array([ankle_xy[0], ankle_xy[1], body.ankle_z + dz]),
        "toe": np.array([toe_xy[0], toe_xy[1], 20.0 + dz]),
        "heel": np.array([heel_xy[0], heel_xy[1], 12.0 + dz]),
        "small_toe": np.array([small_toe_xy[0], small_toe_xy[1], 22.0 + dz]),
        "origin": center - (insole.length / 2.0) * u - (insole.width / 2.0) * v,
        "heading": theta,
    }


def _skeleton(body: SubjectBody, feet: dict, state: _ProgramState, rig: SynthRig):
    """World positions for every GT and OP joint, plus realized foot placements."""
    h = body.height_mm
    joints = {}
    placements = {}
    for side, lift in (("left", state.lift_left), ("right", state.lift_right)):
        fj = _foot_joints(side, feet, body, rig.insole, rig.heel_offset, lift)
        joints[f"{side}_ankle"] = fj["ankle"]
        joints[f"{side}_toe"] = fj["toe"]
        joints[f"{side}_big_toe"] = fj["toe"]
        joints[f"{side}_small_toe"] = fj["small_toe"]
        joints[f"{side}_heel"] = fj["heel"]
        placements[side] = FootPlacement(side, Point2(*fj["origin"]), fj["heading"])

    pelvis = np.array([state.pelvis_xy[0], state.pelvis_xy[1], body.hip_z - state.crouch])
    rot = _rotation(state.lean_forward, state.lean_lateral)
    trunk_len = body.shoulder_z - body.hip_z

    joints["pelvis"] = pelvis
    joints["mid_hip"] = pelvis
    joints["left_hip"] = pelvis + np.array([-body.hip_sep / 2, 0.0, 0.0])
    joints["right_hip"] = pelvis + np.array([body.hip_sep / 2, 0.0, 0.0])
    joints["spine"] = pelvis + rot @ np.array([0.0, 0.0, 0.35 * trunk_len])
    joints["thorax"] = pelvis + rot @ np.array([0.0, 0.0, 0.70 * trunk_len])
    joints["neck"] = pelvis + rot @ np.array([0.0, 0.0, trunk_len])
    joints["head"] = pelvis + rot @ np.array([0.0, 8.0, trunk_len + 0.112 * h])
    joints["nose"] = pelvis + rot @ np.array([0.0, 55.0, trunk_len + 0.090 * h])
    for side, sx in (("left", -1.0), ("right", 1.0)):
        joints[f"{side}_eye"] = pelvis + rot @ np.array([sx * 28.0, 48.0, trunk_len + 0.105 * h])
        joints[f"{side}_ear"] = pelvis + rot @ np.array([sx * 55.0, 5.0, trunk_len + 0.100 * h])
        joints[f"{side}_shoulder"] = pelvis + rot @ np.array(
            [sx * body.shoulder_sep / 2, 0.0, trunk_len - 0.005 * h]
        )
        swing = state.arm_swing * (1.0 if side == "left" else -1.0)
        upper_dir = np.array([sx * 0.12, 0.30 * swing, -1.0])
        upper_dir /= np.linalg.norm(upper_dir)
        joints[f"{side}_elbow"] = joints[f"{side}_shoulder"] + body.upper_arm * (rot @ upper_dir)
        fore_dir = np.array([sx * 0.06, 0.50 * swing + 0.15, -1.0])
        fore_dir /= np.linalg.norm(fore_dir)
        joints[f"{side}_wrist"] = joints[f"{side}_elbow"] + body.forearm * (rot @ fore_dir)
        knee_mid = 0.5 * (joints[f"{side}_hip"] + joints[f"{side}_ankle"])
        joints[f"{side}_knee"] = knee_mid + np.array([0.0, 25.0 + 0.9 * state.crouch, 0.0])
    return joints, placements


def _pose_from_joints(joints: dict, layout_name: str, index: int, timestamp: float) -> Pose3dFrame:
    lay = LAYOUTS[layout_name]
    pos = np.array([joints[name] for name in lay.joints], dtype=np.float64)
    return Pose3dFrame(index, lay, pos, np.ones(lay.n_joints, dtype=bool), timestamp)


def _pressure_blob(
    insole: InsoleSpec, force_n: float, front_bias: float
) -> np.ndarray:
    """Truncated Gaussian pressure grid (kPa) integrating to force_n."""
    if force_n <= 0.0:
        return np.zeros((insole.rows, insole.cols))
    s = insole.cell_size
    x = (np.arange(insole.rows) + 0.5) * s
    y = (np.arange(insole.cols) + 0.5) * s
    gx, gy = np.meshgrid(x, y, indexing="ij")
    mu_x = insole.length * (0.5 + 0.12 * front_bias)
    mu_y = insole.width / 2.0
    sig_x = 0.20 * insole.length
    sig_y = 0.28 * insole.width
    r2 = ((gx - mu_x) / (2.6 * sig_x)) ** 2 + ((gy - mu_y) / (2.6 * sig_y)) ** 2
    g = np.exp(-0.5 * (((gx - mu_x) / sig_x) ** 2 + ((gy - mu_y) / sig_y) ** 2))
    g[r2 > 1.0] = 0.0  # truncate the support to an ellipse
    cell_area_m2 = (s / 1000.0) ** 2
    scale = force_n / (float(g.sum()) * cell_area_m2 * 1000.0)
    return g * scale


def pressure_force_n(pm: PressureMap) -> float:
    """Total normal force (N) carried by a pressure map."""
    cell_area_m2 = (pm.cell_size / 1000.0) ** 2
    return float(pm.values.sum()) * cell_area_m2 * 1000.0


def _load_split(com_xy: np.ndarray, feet: dict, state: _ProgramState) -> tuple:
    """Per-foot load fractions: inverse lever between foot centers, then lift."""
    left, right = feet["left"]["center"], feet["right"]["center"]
    axis = right - left
    s = float(np.dot(com_xy - left, axis) / np.dot(axis, axis))
    s = min(0.95, max(0.05, s))
    w_left = (1.0 - s) * (1.0 - state.lift_left)
    w_right = s * (1.0 - state.lift_right)
    total = w_left + w_right
    if total <= 0.0:
        raise InvalidProgram("program lifted both feet at once")
    return w_left / total, w_right / total


def generate_take(
    rig: SynthRig,
    program: str,
    duration: float,
    noise: Optional[NoiseSpec] = None,
    *,
    subject_id: str = "S01",
    take_id: str = "T01",
    body: Optional[SubjectBody] = None,
    subject_index: int = 0,
) -> SynthTake:
    """Generate one take; kinematics are smooth and all labels are exact.

    The stored CoP/BoS are computed from the generated pressure at the rig's
    reference threshold with the same arithmetic the pipeline uses, so a
    zero-noise take must round-trip exactly.
    """
    if program not in MOTION_PROGRAMS:
        raise InvalidProgram(f"unknown motion program {program!r}; expected one of {MOTION_PROGRAMS}")
    if duration <= 0:
        raise ValueError("duration must be positive")
    body = body or body_for_subject(subject_index)
    feet = _foot_layout(program, body)
    n_frames = int(round(duration * rig.sample_rate))
    frames = []
    for i in range(n_frames):
        t = i / rig.sample_rate
        state = _program_state(program, t, duration, feet)
        joints, placements = _skeleton(body, feet, state, rig)
        gt_pose = _pose_from_joints(joints, "GT", i, t)
        op_pose = _pose_from_joints(joints, "OP", i, t)
        bp_pose = Pose3dFrame(
            i, LAYOUTS["BP"], gt_pose.positions[: len(COMMON_JOINTS)].copy(),
            gt_pose.valid[: len(COMMON_JOINTS)].copy(), t
        )
        com = dempster_com(gt_pose, rig.com_model)

        w_left, w_right = _load_split(com.as_array()[:2], feet, state)
        maps = {}
        for side, frac in (("left", w_left), ("right", w_right)):
            values = _pressure_blob(rig.insole, frac * body.weight_n, state.front_bias)
            maps[side] = PressureMap(
                side, rig.insole.rows, rig.insole.cols, rig.insole.cell_size, values, i
            )
        # recover the placements through the same ankle/toe inversion the
        # pipeline uses, so the stored CoP/BoS round-trip bit-exactly
        placements = {
            side: localize_foot(
                maps[side],
                gt_pose.joint(f"{side}_ankle"),
                gt_pose.joint(f"{side}_toe"),
                heel_offset=rig.heel_offset,
            )
            for side in ("left", "right")
        }
        field = localized_field(
            maps["left"], placements["left"], maps["right"], placements["right"],
            rig.reference_threshold,
        )
        pose2d = {
            cam.camera_id: Pose2dFrame(
                frame_index=i,
                camera_id=cam.camera_id,
                layout=LAYOUTS["OP"],
                uv=np.array([cam.project(p) for p in op_pose.positions]),
                confidence=np.ones(25),
                valid=np.ones(25, dtype=bool),
            )
            for cam in rig.cameras
        }
        frames.append(
            SynthFrame(
                index=i,
                timestamp=t,
                gt_pose=gt_pose,
                bp_pose=bp_pose,
                op_pose3d=op_pose,
                pose2d=pose2d,
                pressure_left=maps["left"],
                pressure_right=maps["right"],
                com=com,
                cop=center_of_pressure(field),
                bos=base_of_support(field),
                grounded_left=w_left > 0.0,
                grounded_right=w_right > 0.0,
                placements=placements,
            )
        )
    take = SynthTake(
        subject_id=subject_id,
        take_id=take_id,
        program=program,
        sample_rate=rig.sample_rate,
        body=body,
        reference_threshold=rig.reference_threshold,
        frames=frames,
    )
    return noise_model(take, noise) if noise is not None else take


def _noisy_pose(pose: Pose3dFrame, rng, sigma: float) -> Pose3dFrame:
    return Pose3dFrame(
        pose.frame_index,
        pose.layout,
        pose.positions + rng.normal(0.0, sigma, pose.positions.shape),
        pose.valid.copy(),
        pose.timestamp,
    )


def noise_model(clean: SynthTake, spec: NoiseSpec) -> SynthTake:
    """Seeded Gaussian degradation per channel; zero-magnitude spec is identity.

    Analytic labels (CoM/CoP/BoS) and placements stay untouched: they describe
    the clean ground truth underneath the degraded observations. Channels with
    zero magnitude keep the clean objects, so unaffected streams stay
    bit-identical.
    """
    if spec.is_identity():
        return clean
    rng = np.random.default_rng(spec.seed)
    frames = []
    for f in clean.frames:
        gt_pose, bp_pose, op_pose = f.gt_pose, f.bp_pose, f.op_pose3d
        if spec.joints_mm > 0:
            gt_pose = _noisy_pose(gt_pose, rng, spec.joints_mm)
            bp_pose = _noisy_pose(bp_pose, rng, spec.joints_mm)
            op_pose = _noisy_pose(op_pose, rng, spec.joints_mm)
        pose2d = f.pose2d
        if spec.pixels_2d > 0 or spec.dropout_rate > 0:
            pose2d = {}
            for cam_id in sorted(f.pose2d):
                p2 = f.pose2d[cam_id]
                uv = p2.uv.copy()
                valid = p2.valid.copy()
                if spec.pixels_2d > 0:
                    uv += rng.normal(0.0, spec.pixels_2d, uv.shape)
                if spec.dropout_rate > 0:
                    valid &= rng.random(valid.shape) >= spec.dropout_rate
                pose2d[cam_id] = Pose2dFrame(
                    p2.frame_index, cam_id, p2.layout, uv, p2.confidence.copy(), valid
                )
        left, right = f.pressure_left, f.pressure_right
        if spec.pressure_kpa > 0:
            noisy = []
            for pm in (left, right):
                values = np.clip(pm.values + rng.normal(0.0, spec.pressure_kpa, pm.values.shape), 0.0, None)
                noisy.append(
                    PressureMap(pm.side, pm.rows, pm.cols, pm.cell_size, values, pm.frame_index)
                )
            left, right = noisy
        frames.append(
            replace(
                f,
                gt_pose=gt_pose,
                bp_pose=bp_pose,
                op_pose3d=op_pose,
                pose2d=pose2d,
                pressure_left=left,
                pressure_right=right,
            )
        )
    return replace(clean, frames=frames)


def image_pose_streams(take: SynthTake, rig: SynthRig, *, min_confidence: float = 0.1) -> dict:
    """Vision-style 3D pose streams: triangulated OP and assembled hybrid."""
    cams = {c.camera_id: c for c in rig.cameras}
    cam_ids = sorted(cams)
    op_stream, hp_stream = [], []
    for f in take.frames:
        op3d = triangulate_frame(
            f.pose2d[cam_ids[0]],
            f.pose2d[cam_ids[1]],
            cams,
            min_confidence=min_confidence,
            sample_rate_hz=take.sample_rate,
        )
        op_stream.append(op3d)
        hp_stream.append(assemble_hybrid_pose(f.bp_pose, op3d))
    return {"op": op_stream, "hp": hp_stream}


ImCom = Union[None, str, Sequence, Callable[[Pose3dFrame], Point3]]


def streams_from_take(
    gt: SynthTake,
    *,
    im: Optional[SynthTake] = None,
    im_com: ImCom = None,
    com_model: Optional[ComModel] = None,
    image_poses: Optional[dict] = None,
) -> TakeStreams:
    """Bundle a clean take (GT channels) and a degraded twin (IM channels).

    im_com selects the image-based CoM stream: None leaves it absent,
    "dempster" applies the segmental model to the degraded pose, a sequence
    is used as-is, and a callable is applied to the degraded pose per frame.
    """
    im = im or gt
    indices = np.array([f.index for f in gt.frames])
    im_com_stream = None
    if im_com is not None:
        if isinstance(im_com, str):
            if im_com != "dempster":
                raise ValueError(f"unknown im_com mode {im_com!r}")
            model = com_model or load_com_model(layout_name="GT")
            im_com_stream = [dempster_com(f.gt_pose, model) for f in im.frames]
        elif callable(im_com):
            im_com_stream = [im_com(f.gt_pose) for f in im.frames]
        else:
            im_com_stream = list(im_com)
    return TakeStreams(
        take_id=gt.take_id,
        subject_id=gt.subject_id,
        sample_rate=gt.sample_rate,
        frame_indices=indices,
        gt_pose=[f.gt_pose for f in gt.frames],
        gt_pressure_left=[f.pressure_left for f in gt.frames],
        gt_pressure_right=[f.pressure_right for f in gt.frames],
        gt_com=[f.com for f in gt.frames],
        im_pose=[f.gt_pose for f in im.frames],
        im_pressure_left=[f.pressure_left for f in im.frames],
        im_pressure_right=[f.pressure_right for f in im.frames],
        im_com=im_com_stream,
        op_pose=image_poses.get("op") if image_poses else None,
        hp_pose=image_poses.get("hp") if image_poses else None,
    )


def com_training_pairs(take: SynthTake, *, pose_attr: str = "op_pose3d") -> list:
    """(pose, exact CoM) pairs for regressor training; poses may be degraded."""
    return [(getattr(f, pose_attr), f.com) for f in take.frames]
