"""Shared builders for hand-constructed takes and series used across tests."""

import math

import numpy as np

from stabilikit.geometry import Point3
from stabilikit.pose import LAYOUTS, Pose3dFrame
from stabilikit.pressure import PressureMap
from stabilikit.stability import StabilityFrame, StabilitySeries, TakeStreams


def standing_gt_pose(frame):
    """Symmetric double-support pose, feet pointing +y at x = +/-150."""
    lay = LAYOUTS["GT"]
    pos = np.zeros((lay.n_joints, 3))
    for side, sx in (("left", -1.0), ("right", 1.0)):
        pos[lay.index(f"{side}_ankle")] = [sx * 150, 0, 80]
        pos[lay.index(f"{side}_toe")] = [sx * 150, 250, 20]
        pos[lay.index(f"{side}_heel")] = [sx * 150, -60, 15]
        pos[lay.index(f"{side}_hip")] = [sx * 100, 0, 900]
        pos[lay.index(f"{side}_knee")] = [sx * 110, 20, 480]
        pos[lay.index(f"{side}_shoulder")] = [sx * 180, 0, 1400]
        pos[lay.index(f"{side}_elbow")] = [sx * 200, 0, 1150]
        pos[lay.index(f"{side}_wrist")] = [sx * 210, 0, 930]
    pos[lay.index("pelvis")] = [0, 0, 900]
    pos[lay.index("spine")] = [0, 0, 1030]
    pos[lay.index("thorax")] = [0, 0, 1210]
    pos[lay.index("neck")] = [0, 0, 1400]
    pos[lay.index("head")] = [0, 0, 1560]
    return Pose3dFrame(frame, lay, pos, np.ones(lay.n_joints, dtype=bool), timestamp=frame / 5.0)


def standing_take(
    n_frames=12,
    pressure_value=20.0,
    com=(0.0, -20.0, 950.0),
    com_wobble=0.0,
    take_id="T1",
    subject_id="S1",
):
    """Uniform double-support take; com_wobble adds a sinusoidal CoM excursion."""
    frames = np.arange(n_frames)
    maps_l = [
        PressureMap("left", 4, 3, 10.0, np.full((4, 3), pressure_value), int(i)) for i in frames
    ]
    maps_r = [
        PressureMap("right", 4, 3, 10.0, np.full((4, 3), pressure_value), int(i)) for i in frames
    ]
    coms = [
        Point3(com[0], com[1] + com_wobble * math.sin(2 * math.pi * i / 10.0), com[2])
        for i in frames
    ]
    return TakeStreams(
        take_id=take_id,
        subject_id=subject_id,
        sample_rate=5.0,
        frame_indices=frames,
        gt_pose=[standing_gt_pose(int(i)) for i in frames],
        gt_pressure_left=maps_l,
        gt_pressure_right=maps_r,
        gt_com=coms,
    )


def series_from_values(values, rate=5.0, valid=None, take_id="synthetic"):
    frames = []
    for i, v in enumerate(values):
        ok = True if valid is None else bool(valid[i])
        frames.append(
            StabilityFrame(
                frame_index=i,
                com_to_cop=float(v) if ok else math.nan,
                com_to_bos=float(v) if ok else math.nan,
                com_valid=ok,
                field_valid=ok,
            )
        )
    return StabilitySeries(take_id=take_id, sample_rate=rate, frames=frames)
