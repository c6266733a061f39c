"""Evaluation statistics: error summaries, correlations, sweeps, and the
combinatorial ground-truth/image-based study.

The two-sided p-value for a correlation uses the t statistic
t = r sqrt((n-2)/(1-r^2)) against Student's t with n-2 degrees of freedom,
evaluated through a continued-fraction regularized incomplete beta function
(accuracy target 1e-10 absolute).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    LengthMismatch,
    MissingObservation,
    NoValidFrames,
    ZeroVariance,
)
from .geometry import euclidean_distance
from .pressure import (
    DEFAULT_IOU_RASTER_MM,
    base_of_support,
    bos_iou,
    center_of_pressure,
    localize_foot,
    localized_field,
)
from .pose import FOOT_JOINTS
from .stability import (
    ALL_CHANNEL_COMBINATIONS,
    ChannelSelection,
    StabilitySeries,
    TakeStreams,
    compute_series,
    paired_metric_arrays,
)

RSTD_FACTOR = 1.4826  # scales the median absolute deviation to a Gaussian std
DEFAULT_SWEEP_THRESHOLDS = tuple(np.arange(0.0, 30.0 + 1e-9, 2.5))
DEFAULT_MIN_VALID_FRACTION = 0.9


@dataclass(frozen=True)
class ErrorStats:
    mean: float
    std: float
    median: float
    rstd: float
    n: int


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p: float
    n: int
    mae: float
    mae_std: float


def error_stats(errors: Sequence[float]) -> ErrorStats:
    """Mean (sample std) and median (robust std from 1.4826 x MAD)."""
    x = np.asarray(errors, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("no error samples")
    med = float(np.median(x))
    mad = float(np.median(np.abs(x - med)))
    return ErrorStats(
        mean=float(x.mean()),
        std=float(x.std(ddof=1)) if x.size > 1 else 0.0,
        median=med,
        rstd=RSTD_FACTOR * mad,
        n=int(x.size),
    )


def _betacf(a: float, b: float, x: float, max_iter: int = 400, eps: float = 1e-15) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) >= tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) >= tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) >= tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) >= tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) >= tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued fraction, using the symmetry split for stability."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, dof: int) -> float:
    """P(|T| >= |t|) for Student's t with dof degrees of freedom."""
    if dof <= 0:
        raise ValueError("degrees of freedom must be positive")
    if not math.isfinite(t):
        return 0.0
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Sample Pearson correlation with t-distribution p-value and MAE.

    Inputs must be paired on valid frames already. Raises LengthMismatch for
    unequal or too-short series and ZeroVariance when either input is constant.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise LengthMismatch(f"paired series must match in length, got {xa.shape} vs {ya.shape}")
    n = xa.size
    if n < 3:
        raise LengthMismatch(f"need at least 3 paired samples, got {n}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if 1.0 - r * r <= 0.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = t_two_sided_p(t, n - 2)
    abs_err = np.abs(xa - ya)
    return CorrelationResult(
        r=r,
        p=p,
        n=n,
        mae=float(abs_err.mean()),
        mae_std=float(abs_err.std(ddof=1)) if n > 1 else 0.0,
    )


def _frame_cop_bos(take: TakeStreams, i: int, localization: str, pressure: str, threshold: float):
    """CoP and localized field for one frame, or None when degenerate."""
    from .errors import DegenerateInput, DegeneratePlacement, EmptyField

    try:
        pose = take.localization_pose(localization)[i]
        if pressure == "IM" and take.im_pressure_left is not None:
            left, right = take.im_pressure_left[i], take.im_pressure_right[i]
        else:
            left, right = take.gt_pressure_left[i], take.gt_pressure_right[i]
        joints = FOOT_JOINTS[pose.layout.name]
        lp = localize_foot(left, pose.joint(joints["left"][0]), pose.joint(joints["left"][1]))
        rp = localize_foot(right, pose.joint(joints["right"][0]), pose.joint(joints["right"][1]))
        fld = localized_field(left, lp, right, rp, threshold)
        return center_of_pressure(fld), fld
    except (MissingObservation, DegeneratePlacement, EmptyField, DegenerateInput, KeyError):
        return None


@dataclass
class SweepResult:
    metric: str  # "cop_error" (mm) or "bos_iou" (ratio)
    localization: str
    thresholds: tuple
    per_subject: dict  # subject_id -> list of per-threshold means (NaN where empty)
    overall_mean: list
    overall_median: list
    n_valid: list  # frames contributing per threshold

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        if np.any(np.diff(t) <= 0):
            raise ValueError("thresholds must be strictly increasing")


def threshold_sweep(
    takes: Sequence[TakeStreams],
    localization: str = "HP",
    metric: str = "cop_error",
    thresholds: Sequence[float] = DEFAULT_SWEEP_THRESHOLDS,
    *,
    raster_cell: float = DEFAULT_IOU_RASTER_MM,
) -> SweepResult:
    """Recompute CoP/BoS at every threshold and compare against the GT path.

    The reference is GT pressure with GT localization at the same threshold;
    the evaluated path uses the requested localization stream and predicted
    pressure maps when the take carries them. Per-frame failures are gaps.
    """
    if metric not in ("cop_error", "bos_iou"):
        raise ValueError(f"unknown sweep metric {metric!r}")
    if not takes:
        raise EmptyInput("no takes to sweep")
    thresholds = tuple(float(t) for t in thresholds)
    subjects = sorted({t.subject_id for t in takes})
    per_subject = {s: [] for s in subjects}
    overall_mean, overall_median, n_valid = [], [], []
    for thr in thresholds:
        by_subject = {s: [] for s in subjects}
        pooled = []
        for take in takes:
            for i in range(take.n_frames):
                ref = _frame_cop_bos(take, i, "GT", "GT", thr)
                pred = _frame_cop_bos(take, i, localization, "IM", thr)
                if ref is None or pred is None:
                    continue
                if metric == "cop_error":
                    value = euclidean_distance(pred[0], ref[0])
                else:
                    try:
                        value = bos_iou(pred[1], ref[1], raster_cell)
                    except Exception:
                        continue
                by_subject[take.subject_id].append(value)
                pooled.append(value)
        for s in subjects:
            vals = by_subject[s]
            per_subject[s].append(float(np.mean(vals)) if vals else math.nan)
        overall_mean.append(float(np.mean(pooled)) if pooled else math.nan)
        overall_median.append(float(np.median(pooled)) if pooled else math.nan)
        n_valid.append(len(pooled))
    return SweepResult(
        metric=metric,
        localization=localization,
        thresholds=thresholds,
        per_subject=per_subject,
        overall_mean=overall_mean,
        overall_median=overall_median,
        n_valid=n_valid,
    )


@dataclass
class StudyCell:
    """One combination x one metric of the combinatorial study."""

    metric: str
    channels: str
    r_mean: float
    r_std: float
    p_max: float
    mae: float
    mae_std: float
    n_frames: int
    n_groups: int
    per_group: dict  # subject_id -> CorrelationResult
    skipped_groups: tuple = ()


@dataclass
class StudyResult:
    threshold: float
    min_valid_fraction: float
    cells: list  # list[StudyCell]
    excluded_takes: tuple = ()

    def cell(self, metric: str, channels: str) -> StudyCell:
        for c in self.cells:
            if c.metric == metric and c.channels == channels:
                return c
        raise KeyError(f"no study cell for {metric} / {channels}")


def combinatorial_study(
    takes: Sequence[TakeStreams],
    channels: Sequence[ChannelSelection] = ALL_CHANNEL_COMBINATIONS,
    *,
    threshold: float = 10.0,
    min_valid_fraction: float = DEFAULT_MIN_VALID_FRACTION,
    com_estimator=None,
) -> StudyResult:
    """Correlation/MAE of every channel combination against the all-GT path.

    Metric series are paired frame-by-frame with the GT-GT-GT series of the
    same take. Takes whose joint-valid fraction falls below
    min_valid_fraction are excluded (incomplete performances). Correlations
    are computed per subject group, mirroring one left-out subject per
    experiment; MAE pools all paired frames. Groups with a constant series
    are recorded as skipped rather than given a fabricated r.
    """
    if not takes:
        raise EmptyInput("no takes to study")
    ref = {t.take_id: compute_series(t, ChannelSelection("GT", "GT", "GT"), threshold) for t in takes}
    cells = []
    excluded = set()
    for combo in channels:
        series = {
            t.take_id: compute_series(t, combo, threshold, com_estimator=com_estimator)
            for t in takes
        }
        for metric in ("com_to_cop", "com_to_bos"):
            pairs = {}
            for t in takes:
                a, b, _dropped = paired_metric_arrays(series[t.take_id], ref[t.take_id], metric)
                if t.n_frames == 0 or len(a) / t.n_frames < min_valid_fraction:
                    excluded.add(t.take_id)
                    continue
                pairs[t.take_id] = (a, b, t.subject_id)
            if not pairs:
                raise NoValidFrames(
                    f"no complete takes for {combo.label}/{metric} at threshold {threshold}"
                )
            groups = {}
            for a, b, sid in pairs.values():
                xs, ys = groups.setdefault(sid, ([], []))
                xs.append(a)
                ys.append(b)
            per_group = {}
            skipped = []
            for sid, (xs, ys) in sorted(groups.items()):
                try:
                    per_group[sid] = pearson(np.concatenate(xs), np.concatenate(ys))
                except ZeroVariance:
                    skipped.append(sid)
            if not per_group:
                raise ZeroVariance(
                    f"every subject group is constant for {combo.label}/{metric}"
                )
            rs = np.array([c.r for c in per_group.values()])
            all_x = np.concatenate([a for a, _, _ in pairs.values()])
            all_y = np.concatenate([b for _, b, _ in pairs.values()])
            abs_err = np.abs(all_x - all_y)
            cells.append(
                StudyCell(
                    metric=metric,
                    channels=combo.label,
                    r_mean=float(rs.mean()),
                    r_std=float(rs.std(ddof=1)) if rs.size > 1 else 0.0,
                    p_max=float(max(c.p for c in per_group.values())),
                    mae=float(abs_err.mean()),
                    mae_std=float(abs_err.std(ddof=1)) if abs_err.size > 1 else 0.0,
                    n_frames=int(abs_err.size),
                    n_groups=len(per_group),
                    per_group=per_group,
                    skipped_groups=tuple(skipped),
                )
            )
    return StudyResult(
        threshold=threshold,
        min_valid_fraction=min_valid_fraction,
        cells=cells,
        excluded_takes=tuple(sorted(excluded)),
    )
