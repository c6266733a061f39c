"""Per-frame stability metrics and their time series over a take.

Two metrics are computed per frame: the planar distance between the 2D CoM
and the CoP, and the signed shortest distance from the 2D CoM to the support
hull border (positive inside). Frames where any component cannot be computed
are recorded as gaps, not zeros, and excluded from downstream statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import butter, filtfilt

from .errors import (
    DegenerateInput,
    DegeneratePlacement,
    EmptyField,
    MissingObservation,
    SeriesTooShort,
    StreamMisalignment,
)
from .geometry import ConvexPolygon, Point2, Point3, euclidean_distance, signed_distance_to_boundary
from .pose import FOOT_JOINTS, Pose3dFrame
from .pressure import (
    DEFAULT_THRESHOLD_KPA,
    PressureMap,
    base_of_support,
    center_of_pressure,
    localize_foot,
    localized_field,
)

DEFAULT_SAMPLE_RATE_HZ = 5.0
DEFAULT_TREND_CUTOFF_HZ = 0.2
TREND_FILTER_ORDER = 4

GT = "GT"
IM = "IM"


@dataclass(frozen=True)
class ChannelSelection:
    """Provenance of the three data channels feeding the metrics."""

    pressure: str = GT
    localization: str = GT
    com: str = GT

    def __post_init__(self):
        for name in ("pressure", "localization", "com"):
            if getattr(self, name) not in (GT, IM):
                raise ValueError(f"{name} channel must be GT or IM")

    @property
    def label(self) -> str:
        return f"{self.pressure}-{self.localization}-{self.com}"

    @staticmethod
    def from_label(label: str) -> "ChannelSelection":
        parts = label.strip().upper().split("-")
        if len(parts) != 3:
            raise ValueError(f"channel label must look like GT-IM-GT, got {label!r}")
        return ChannelSelection(*parts)


ALL_CHANNEL_COMBINATIONS = tuple(
    ChannelSelection(p, l, c) for p in (GT, IM) for l in (GT, IM) for c in (GT, IM)
)


@dataclass
class StabilityFrame:
    """Stability components and metrics for one frame."""

    frame_index: int
    com2d: Optional[Point2] = None
    cop: Optional[Point2] = None
    bos: Optional[ConvexPolygon] = None
    com_to_cop: float = math.nan  # mm, >= 0
    com_to_bos: float = math.nan  # mm, signed (positive inside)
    com_valid: bool = False
    field_valid: bool = False
    filtered: Optional[bool] = None  # set by lowpass_trend

    @property
    def valid(self) -> bool:
        return self.com_valid and self.field_valid


@dataclass
class StabilitySeries:
    """Ordered stability frames of one take plus channel provenance."""

    take_id: str
    sample_rate: float
    frames: list
    channels: ChannelSelection = field(default_factory=ChannelSelection)
    subject_id: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        idx = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("frame indices must be strictly increasing")

    def valid_mask(self) -> np.ndarray:
        return np.array([f.valid for f in self.frames], dtype=bool)

    def metric(self, name: str) -> np.ndarray:
        """Metric channel as an array with NaN on invalid frames."""
        if name not in ("com_to_cop", "com_to_bos"):
            raise KeyError(f"unknown metric {name!r}")
        return np.array(
            [getattr(f, name) if f.valid else math.nan for f in self.frames], dtype=np.float64
        )

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def com_to_cop(com2d: Point2, cop: Point2) -> float:
    """Planar distance between the 2D CoM and the CoP (mm, >= 0)."""
    return euclidean_distance(com2d, cop)


def com_to_bos(com2d: Point2, bos: ConvexPolygon) -> float:
    """Signed shortest distance from the 2D CoM to the support border (mm)."""
    return signed_distance_to_boundary(com2d, bos)


@dataclass
class TakeStreams:
    """Time-aligned per-take input streams, already decimated to sample_rate.

    GT channels come from gt_pose / gt_pressure_* / gt_com. IM channels come
    from im_pose (vision-derived joints), im_pressure_* (predicted maps) and
    im_com (predicted CoM), whichever the channel selection asks for.
    """

    take_id: str
    subject_id: str
    sample_rate: float
    frame_indices: np.ndarray
    gt_pose: Optional[list] = None  # list[Pose3dFrame]
    gt_pressure_left: Optional[list] = None  # list[PressureMap]
    gt_pressure_right: Optional[list] = None
    gt_com: Optional[list] = None  # list[Optional[Point3]]
    im_pose: Optional[list] = None
    im_pressure_left: Optional[list] = None
    im_pressure_right: Optional[list] = None
    im_com: Optional[list] = None
    op_pose: Optional[list] = None  # extra localization variants for sweeps
    hp_pose: Optional[list] = None

    def __post_init__(self):
        self.frame_indices = np.asarray(self.frame_indices, dtype=np.int64)
        n = len(self.frame_indices)
        for name in (
            "gt_pose",
            "gt_pressure_left",
            "gt_pressure_right",
            "gt_com",
            "im_pose",
            "im_pressure_left",
            "im_pressure_right",
            "im_com",
            "op_pose",
            "hp_pose",
        ):
            stream = getattr(self, name)
            if stream is not None and len(stream) != n:
                raise StreamMisalignment(
                    f"stream {name} has {len(stream)} frames, expected {n}", index=min(len(stream), n)
                )

    @property
    def n_frames(self) -> int:
        return len(self.frame_indices)

    def localization_pose(self, which: str) -> list:
        pose = {"GT": self.gt_pose, "IM": self.im_pose, "HP": self.hp_pose, "OP": self.op_pose}[
            which
        ]
        if pose is None:
            raise MissingObservation(f"take {self.take_id} has no {which} pose stream")
        return pose


def _frame_components(
    take: TakeStreams,
    i: int,
    channels: ChannelSelection,
    threshold: float,
    com_estimator: Optional[Callable[[Pose3dFrame], Point3]],
):
    """CoP, BoS and CoM for one frame, or None where a component fails."""
    loc_pose = take.localization_pose(channels.localization)[i]
    if channels.pressure == GT:
        left, right = take.gt_pressure_left[i], take.gt_pressure_right[i]
    else:
        if take.im_pressure_left is None or take.im_pressure_right is None:
            raise MissingObservation(f"take {take.take_id} has no predicted pressure stream")
        left, right = take.im_pressure_left[i], take.im_pressure_right[i]

    cop = bos = None
    try:
        foot_joints = FOOT_JOINTS[loc_pose.layout.name]
        placements = {}
        for side, pm in (("left", left), ("right", right)):
            ankle_name, toe_name = foot_joints[side]
            placements[side] = localize_foot(pm, loc_pose.joint(ankle_name), loc_pose.joint(toe_name))
        fld = localized_field(left, placements["left"], right, placements["right"], threshold)
        cop = center_of_pressure(fld)
        bos = base_of_support(fld)
    except (MissingObservation, DegeneratePlacement, EmptyField, DegenerateInput, KeyError):
        cop = bos = None

    com3d = None
    try:
        if channels.com == GT:
            com3d = take.gt_com[i] if take.gt_com is not None else None
        elif take.im_com is not None:
            com3d = take.im_com[i]
        elif com_estimator is not None:
            com3d = com_estimator(take.localization_pose(IM)[i])
    except MissingObservation:
        com3d = None
    return cop, bos, com3d


def compute_series(
    take: TakeStreams,
    channels: ChannelSelection = ChannelSelection(),
    threshold: float = DEFAULT_THRESHOLD_KPA,
    *,
    com_estimator: Optional[Callable[[Pose3dFrame], Point3]] = None,
) -> StabilitySeries:
    """Per-frame stability metrics for one take under a channel selection.

    The CoM channel uses the GT label stream, a precomputed IM CoM stream, or
    com_estimator applied to the IM pose, in that order of availability.
    Frames with an empty field, degenerate placement or missing joints are
    marked invalid and excluded from statistics downstream.
    """
    frames = []
    for i, frame_index in enumerate(take.frame_indices):
        cop, bos, com3d = _frame_components(take, i, channels, threshold, com_estimator)
        f = StabilityFrame(frame_index=int(frame_index))
        f.field_valid = cop is not None and bos is not None
        f.com_valid = com3d is not None
        if f.field_valid:
            f.cop, f.bos = cop, bos
        if f.com_valid:
            f.com2d = com3d.floor_projection()
        if f.valid:
            f.com_to_cop = com_to_cop(f.com2d, f.cop)
            f.com_to_bos = com_to_bos(f.com2d, f.bos)
        frames.append(f)
    return StabilitySeries(
        take_id=take.take_id,
        sample_rate=take.sample_rate,
        frames=frames,
        channels=channels,
        subject_id=take.subject_id,
    )


def _dual_pass_cutoff(cutoff_hz: float, order: int) -> float:
    """Pre-warp the design cutoff so the forward-backward pass is -3 dB at cutoff_hz."""
    return cutoff_hz / (2.0 ** (1.0 / 2.0) - 1.0) ** (1.0 / (2.0 * order))


def filter_settling_length(order: int = TREND_FILTER_ORDER) -> int:
    # matches the padding scipy.signal.filtfilt needs for a stable edge
    return 3 * (order + 1)


def lowpass_trend(
    series: StabilitySeries,
    cutoff: float = DEFAULT_TREND_CUTOFF_HZ,
    *,
    order: int = TREND_FILTER_ORDER,
) -> StabilitySeries:
    """Zero-phase low-pass trend of both metric channels.

    A Butterworth filter of the given order is applied forward then backward
    (zero phase, doubled effective order); the design cutoff is pre-warped so
    the dual pass is -3 dB at the requested cutoff. Invalid frames split the
    series into segments; segments shorter than three settling lengths are
    passed through unfiltered and flagged.
    """
    if cutoff >= series.sample_rate / 2.0:
        raise ValueError(f"cutoff {cutoff} Hz must be below Nyquist ({series.sample_rate / 2} Hz)")
    settle = filter_settling_length(order)
    min_len = 3 * settle
    valid = series.valid_mask()
    if int(valid.sum()) < min_len:
        raise SeriesTooShort(
            f"{int(valid.sum())} valid frames < minimum {min_len} for cutoff {cutoff} Hz"
        )
    b, a = butter(order, _dual_pass_cutoff(cutoff, order) / (series.sample_rate / 2.0))

    # contiguous runs of valid frames
    segments = []
    start = None
    for i, ok in enumerate(valid):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            segments.append((start, i))
            start = None
    if start is not None:
        segments.append((start, len(valid)))

    channels = {name: series.metric(name) for name in ("com_to_cop", "com_to_bos")}
    filtered_flags = np.zeros(len(valid), dtype=bool)
    for s, e in segments:
        if e - s >= min_len:
            for name, values in channels.items():
                values[s:e] = filtfilt(b, a, values[s:e])
            filtered_flags[s:e] = True

    out_frames = []
    for i, f in enumerate(series.frames):
        nf = replace(
            f,
            com_to_cop=float(channels["com_to_cop"][i]) if f.valid else math.nan,
            com_to_bos=float(channels["com_to_bos"][i]) if f.valid else math.nan,
            filtered=bool(filtered_flags[i]) if f.valid else None,
        )
        out_frames.append(nf)
    return StabilitySeries(
        take_id=series.take_id,
        sample_rate=series.sample_rate,
        frames=out_frames,
        channels=series.channels,
        subject_id=series.subject_id,
    )


def paired_metric_arrays(
    series_a: StabilitySeries, series_b: StabilitySeries, metric: str
) -> tuple:
    """Metric values on frames valid in both series, plus the dropped count."""
    if series_a.n_frames != series_b.n_frames:
        raise StreamMisalignment(
            f"series lengths differ: {series_a.n_frames} vs ({series_b.n_frames})"
        )
    for fa, fb in zip(series_a.frames, series_b.frames):
        if fa.frame_index != fb.frame_index:
            raise StreamMisalignment("series frame indices differ", index=fa.frame_index)
    mask = series_a.valid_mask() & series_b.valid_mask()
    a = series_a.metric(metric)[mask]
    b = series_b.metric(metric)[mask]
    dropped = int((~mask).sum())
    return a, b, dropped
