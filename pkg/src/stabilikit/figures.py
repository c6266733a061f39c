"""Matplotlib figure rendering for the CLI report path.

Every function writes a PNG next to the delimited output and returns the
path. Rendering is deterministic: fixed style, fixed dpi, and constant PNG
metadata, so repeated runs are byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KWARGS = {"dpi": 110, "metadata": {"Software": "stabilikit"}}
_METRIC_LABELS = {"com_to_cop": "CoM to CoP (mm)", "com_to_bos": "CoM to BoS (mm)"}


def _new_axes(n_rows=1, height=3.0):
    fig, axes = plt.subplots(n_rows, 1, figsize=(9.0, height * n_rows), squeeze=False)
    return fig, axes[:, 0]


def _finish(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_series_figure(path, series) -> Path:
    """Both metric channels over time for one take."""
    fig, axes = _new_axes(2)
    t = np.array([f.frame_index for f in series.frames]) / series.sample_rate
    for ax, name in zip(axes, ("com_to_cop", "com_to_bos")):
        ax.plot(t, series.metric(name), lw=1.2, color="tab:blue")
        if name == "com_to_bos":
            ax.axhline(0.0, color="tab:red", lw=0.8, ls="--")
        ax.set_ylabel(_METRIC_LABELS[name])
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("time (s)")
    axes[0].set_title(f"{series.take_id} [{series.channels.label}]")
    return _finish(fig, path)


def save_trend_figure(path, raw_series, trend_series, cutoff_hz: float) -> Path:
    """Raw metrics overlaid with their zero-phase low-pass trend."""
    fig, axes = _new_axes(2)
    t = np.array([f.frame_index for f in raw_series.frames]) / raw_series.sample_rate
    for ax, name in zip(axes, ("com_to_cop", "com_to_bos")):
        ax.plot(t, raw_series.metric(name), lw=0.8, color="0.6", label="raw")
        ax.plot(t, trend_series.metric(name), lw=1.6, color="tab:red", label=f"trend ({cutoff_hz} Hz)")
        ax.set_ylabel(_METRIC_LABELS[name])
        ax.grid(alpha=0.3)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time (s)")
    axes[0].set_title(f"{raw_series.take_id} [{raw_series.channels.label}]")
    return _finish(fig, path)


def save_sweep_figure(path, result) -> Path:
    """Per-subject means plus overall mean/median across thresholds."""
    fig, axes = _new_axes(1, height=4.0)
    ax = axes[0]
    thr = np.asarray(result.thresholds)
    for sid in sorted(result.per_subject):
        ax.plot(thr, result.per_subject[sid], lw=0.9, alpha=0.65, label=sid)
    ax.plot(thr, result.overall_mean, color="black", lw=2.0, label="mean")
    ax.plot(thr, result.overall_median, color="black", lw=2.0, ls="--", label="median")
    for ref in (10.0, 15.0):
        if thr.min() <= ref <= thr.max():
            ax.axvline(ref, color="0.5", lw=0.8)
    ax.set_xlabel("pressure threshold (kPa)")
    ylabel = "CoP error (mm)" if result.metric == "cop_error" else "BoS IoU"
    ax.set_ylabel(ylabel)
    ax.set_title(f"{result.metric} vs threshold, {result.localization} localization")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    return _finish(fig, path)


def save_study_figure(path, result) -> Path:
    """Grouped bars of mean r per channel combination, one panel per metric."""
    metrics = sorted({c.metric for c in result.cells})
    fig, axes = _new_axes(len(metrics), height=3.2)
    for ax, metric in zip(axes, metrics):
        cells = [c for c in result.cells if c.metric == metric]
        labels = [c.channels for c in cells]
        r = [c.r_mean for c in cells]
        err = [c.r_std for c in cells]
        x = np.arange(len(cells))
        ax.bar(x, r, yerr=err, capsize=3, color="tab:blue", alpha=0.85)
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
        ax.set_ylabel("r vs all-GT")
        ax.set_ylim(-0.1, 1.05)
        ax.set_title(metric)
        ax.grid(alpha=0.3, axis="y")
    return _finish(fig, path)


def save_com_error_figure(path, stats_by_method: dict) -> Path:
    """Mean +/- std and median CoM error per estimation method."""
    fig, axes = _new_axes(1, height=3.6)
    ax = axes[0]
    methods = list(stats_by_method)
    means = [stats_by_method[m].mean for m in methods]
    stds = [stats_by_method[m].std for m in methods]
    medians = [stats_by_method[m].median for m in methods]
    x = np.arange(len(methods))
    ax.bar(x, means, yerr=stds, capsize=4, color="tab:green", alpha=0.8, label="mean (std)")
    ax.plot(x, medians, "k_", markersize=18, label="median")
    ax.set_xticks(x)
    ax.set_xticklabels(methods, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("3D CoM error (mm)")
    ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_training_figure(path, histories: dict) -> Path:
    """Per-split training loss curves."""
    fig, axes = _new_axes(1, height=3.6)
    ax = axes[0]
    for label, losses in sorted(histories.items()):
        ax.plot(np.arange(1, len(losses) + 1), losses, lw=1.2, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss (mm)")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return _finish(fig, path)
