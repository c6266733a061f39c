"""Segmental center-of-mass estimation from body segment inertial parameters.

The default parameter tables (Dempster cadaver data as tabulated by Winter)
ship as JSON data files so laboratories can substitute their own.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import MissingObservation
from .geometry import Point3
from .pose import Pose3dFrame

MASS_FRACTION_TOL = 1e-6


@dataclass(frozen=True)
class Segment:
    name: str
    proximal_joint: str
    distal_joint: str
    mass_fraction: float
    com_position_ratio: float  # fraction of segment length from the proximal end

    def __post_init__(self):
        if self.mass_fraction <= 0:
            raise ValueError(f"segment {self.name}: mass_fraction must be > 0")
        if not 0.0 <= self.com_position_ratio <= 1.0:
            raise ValueError(f"segment {self.name}: com_position_ratio must be in [0, 1]")


@dataclass(frozen=True)
class ComModel:
    """Per-segment mass fractions and CoM position ratios."""

    name: str
    segments: tuple[Segment, ...]

    def __post_init__(self):
        total = sum(s.mass_fraction for s in self.segments)
        if abs(total - 1.0) > MASS_FRACTION_TOL:
            raise ValueError(f"mass fractions sum to {total}, expected 1 +/- {MASS_FRACTION_TOL}")

    def joints(self) -> set:
        out = set()
        for s in self.segments:
            out.add(s.proximal_joint)
            out.add(s.distal_joint)
        return out


def com_model_from_dict(spec: dict) -> ComModel:
    segs = tuple(
        Segment(
            name=s["name"],
            proximal_joint=s["proximal"],
            distal_joint=s["distal"],
            mass_fraction=float(s["mass_fraction"]),
            com_position_ratio=float(s["com_position_ratio"]),
        )
        for s in spec["segments"]
    )
    return ComModel(name=spec.get("name", "custom"), segments=segs)


def load_com_model(path=None, *, layout_name: str = "GT") -> ComModel:
    """Load a segment table from path, or the bundled default for a layout."""
    if path is None:
        fname = {"GT": "segments_gt.json", "HP": "segments_hp.json", "OP": "segments_hp.json"}[
            layout_name
        ]
        text = resources.files("stabilikit.data").joinpath(fname).read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return com_model_from_dict(json.loads(text))


def dempster_com(pose: Pose3dFrame, model: ComModel) -> Point3:
    """Mass-fraction-weighted sum of per-segment CoMs.

    Every segment CoM lies com_position_ratio of the way from the proximal to
    the distal joint. Raises MissingObservation listing any absent joints.
    """
    lay = pose.layout
    missing = sorted(
        j for j in model.joints() if j not in lay.joints or not pose.valid[lay.index(j)]
    )
    if missing:
        raise MissingObservation(f"joints unavailable for segmental CoM: {', '.join(missing)}")
    com = np.zeros(3)
    for seg in model.segments:
        p = pose.positions[lay.index(seg.proximal_joint)]
        d = pose.positions[lay.index(seg.distal_joint)]
        com += seg.mass_fraction * (p + seg.com_position_ratio * (d - p))
    return Point3(*com)
