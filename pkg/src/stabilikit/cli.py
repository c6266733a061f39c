"""Command-line interface: dataset synthesis, triangulation, training,
stability series, threshold sweeps, the combinatorial study, and trend curves.

Every reporting subcommand writes CSV + JSON (with the run configuration
embedded) and a PNG figure alongside. Exit codes: 0 success, 1 data error
(machine-readable JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import figures
from .comnet import TrainConfig, comnet_forward, comnet_train, evaluate_com_errors, loso_splits
from .dempster import dempster_com, load_com_model
from .errors import StabilikitError
from .evaluation import (
    DEFAULT_SWEEP_THRESHOLDS,
    combinatorial_study,
    error_stats,
    threshold_sweep,
)
from .fileio import (
    discover_manifests,
    load_model_params,
    load_take,
    read_calibration,
    read_manifest,
    read_pose2d,
    read_series,
    save_model_params,
    write_report_json,
    write_series,
    write_synth_take,
    write_table_csv,
)
from .geometry import Point3
from .pose import hip_center, triangulate_frame
from .stability import ALL_CHANNEL_COMBINATIONS, ChannelSelection, compute_series, lowpass_trend
from .synth import (
    MOTION_PROGRAMS,
    NoiseSpec,
    default_rig,
    generate_take,
    noise_model,
)

SEED_ENV_VAR = "STABILIKIT_SEED"


def _resolve_seed(args) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise StabilikitError(f"{SEED_ENV_VAR}={env!r} is not an integer") from None
    return args.seed


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_thresholds(spec: str):
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise StabilikitError(f"threshold range must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        return tuple(np.arange(start, stop + 1e-9, step))
    return tuple(float(p) for p in spec.split(","))


def _parse_channels(spec: str):
    if spec == "all":
        return list(ALL_CHANNEL_COMBINATIONS)
    return [ChannelSelection.from_label(s) for s in spec.split(",")]


def _load_dataset(dataset_dir, rate):
    manifests = discover_manifests(dataset_dir)
    if not manifests:
        raise StabilikitError(f"no manifest.json found under {dataset_dir}")
    return [load_take(m, target_rate_hz=rate) for m in manifests]


def _run_config(args, command):
    cfg = {"command": command, "seed": getattr(args, "resolved_seed", None)}
    for key in (
        "threshold", "thresholds", "cutoff", "channels", "localization", "metric",
        "rate", "duration", "subjects", "takes_per_subject", "programs", "width",
        "epochs", "batch_size", "lr", "noise_px", "noise_mm", "noise_kpa",
        "com_noise_mm", "layout", "pose_stream", "min_valid_fraction", "loso",
    ):
        if hasattr(args, key):
            value = getattr(args, key)
            cfg[key] = value if not isinstance(value, tuple) else list(value)
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    out = _outdir(args)
    seed = args.resolved_seed
    rig = default_rig(seed=seed, sample_rate=args.rate)
    programs = args.programs.split(",")
    unknown = [p for p in programs if p not in MOTION_PROGRAMS]
    if unknown:
        raise StabilikitError(f"unknown programs {unknown}; choose from {MOTION_PROGRAMS}")
    manifests = []
    for s in range(args.subjects):
        subject_id = f"S{s + 1:02d}"
        for t in range(args.takes_per_subject):
            take_id = f"T{t + 1:02d}"
            program = programs[(s * args.takes_per_subject + t) % len(programs)]
            take = generate_take(
                rig,
                program,
                args.duration,
                subject_id=subject_id,
                take_id=take_id,
                subject_index=s,
            )
            noise_seed = seed * 100_003 + s * 1_009 + t
            spec = NoiseSpec(
                pixels_2d=args.noise_px,
                joints_mm=args.noise_mm,
                pressure_kpa=args.noise_kpa,
                seed=noise_seed,
            )
            degraded = noise_model(take, spec)
            rng = np.random.default_rng(noise_seed + 1)
            im_com = [
                Point3(*(f.com.as_array() + rng.normal(0.0, args.com_noise_mm, 3)))
                if args.com_noise_mm > 0
                else f.com
                for f in take.frames
            ]
            manifest = write_synth_take(
                out / subject_id / take_id, take, rig.cameras, im_take=degraded,
                im_com_stream=im_com,
            )
            manifests.append(str(manifest.relative_to(out)))
            print(f"wrote {subject_id}/{take_id} ({program}, {take.n_frames} frames)")
    write_report_json(
        out / "dataset.json", {"manifests": sorted(manifests)}, _run_config(args, "synth")
    )
    return 0


def cmd_triangulate(args) -> int:
    out = _outdir(args)
    rows = []
    for manifest_path in discover_manifests(args.dataset):
        manifest = read_manifest(manifest_path)
        if manifest.excluded or "pose2d" not in manifest.files:
            continue
        base = manifest_path.parent
        cams = read_calibration(base / manifest.files["calibration"])
        views = {}
        for cam_id, rel in sorted(manifest.files["pose2d"].items()):
            _, _, frames = read_pose2d(base / rel)
            views[cam_id] = frames
        a_id, b_id = sorted(views)[:2]
        label = f"{manifest.subject_id}_{manifest.take_id}"
        residuals = []
        n_joints = views[a_id][0].layout.n_joints
        poses = []
        for fa, fb in zip(views[a_id], views[b_id]):
            res = np.empty(n_joints)
            poses.append(
                triangulate_frame(
                    fa, fb, cams, min_confidence=args.min_confidence,
                    sample_rate_hz=manifest.sample_rate_hz, residuals=res,
                )
            )
            residuals.append(res)
        residuals = np.concatenate(residuals)
        finite = residuals[np.isfinite(residuals)]
        valid_fraction = float(np.mean([p.valid.mean() for p in poses]))
        from .fileio import write_pose3d

        write_pose3d(out / f"{label}_op_pose.csv", poses, manifest.sample_rate_hz)
        stats = error_stats(finite) if finite.size else None
        rows.append(
            [
                label,
                len(poses),
                valid_fraction,
                stats.mean if stats else "",
                stats.median if stats else "",
                stats.rstd if stats else "",
            ]
        )
        print(f"{label}: {len(poses)} frames, mean residual "
              f"{stats.mean if stats else float('nan'):.4g} px")
    if not rows:
        raise StabilikitError(f"no takes with 2D poses found under {args.dataset}")
    write_table_csv(
        out / "triangulation.csv",
        ["take", "n_frames", "valid_fraction", "residual_mean_px", "residual_median_px", "residual_rstd_px"],
        rows,
    )
    write_report_json(
        out / "triangulation.json",
        {"takes": [{"take": r[0], "n_frames": r[1], "valid_fraction": r[2]} for r in rows]},
        _run_config(args, "triangulate"),
    )
    return 0


def _training_pairs(takes, pose_stream):
    pairs = []
    for take in takes:
        poses = take.localization_pose(pose_stream)
        if take.gt_com is None:
            raise StabilikitError(f"take {take.take_id} carries no GT CoM labels")
        for pose, com in zip(poses, take.gt_com):
            if com is not None and pose.valid.all():
                pairs.append((pose, com))
    return pairs


def cmd_train_com(args) -> int:
    out = _outdir(args)
    takes = _load_dataset(args.dataset, args.rate)
    cfg = TrainConfig(
        epochs=args.epochs,
        initial_lr=args.lr,
        batch_size=args.batch_size,
        seed=args.resolved_seed,
        width=args.width,
    )
    histories = {}
    rows = []
    splits = loso_splits(takes, subject_of=lambda t: t.subject_id)
    if args.max_splits is not None:
        splits = splits[: args.max_splits]
    for split in splits:
        train_pairs = _training_pairs(split.train, args.pose_stream)
        test_pairs = _training_pairs(split.test, args.pose_stream)
        history = []
        params = comnet_train(train_pairs, cfg, history=history)
        model_path = out / f"comnet_{split.subject_id}.npz"
        save_model_params(model_path, params)
        errors = evaluate_com_errors(
            test_pairs, lambda p: comnet_forward(p, params, "eval")
        )
        baseline = evaluate_com_errors(test_pairs, lambda p: hip_center(p))
        stats, base_stats = error_stats(errors), error_stats(baseline)
        histories[str(split.subject_id)] = history
        rows.append(
            [split.subject_id, len(train_pairs), len(test_pairs),
             stats.mean, stats.median, stats.rstd, base_stats.mean]
        )
        print(
            f"split {split.subject_id}: test error {stats.mean:.2f} mm "
            f"(hip baseline {base_stats.mean:.2f} mm), model -> {model_path.name}"
        )
    write_table_csv(
        out / "training.csv",
        ["test_subject", "n_train", "n_test", "error_mean_mm", "error_median_mm",
         "error_rstd_mm", "hip_baseline_mean_mm"],
        rows,
    )
    write_report_json(
        out / "training.json",
        {"splits": [{"subject": str(r[0]), "error_mean_mm": r[3]} for r in rows]},
        _run_config(args, "train-com"),
    )
    figures.save_training_figure(out / "training.png", histories)
    return 0


def cmd_com_eval(args) -> int:
    out = _outdir(args)
    takes = _load_dataset(args.dataset, args.rate)
    pairs = _training_pairs(takes, args.pose_stream)
    methods = {}
    methods["hip_center"] = evaluate_com_errors(pairs, lambda p: hip_center(p))
    layout_name = pairs[0][0].layout.name
    com_model = load_com_model(layout_name=layout_name)
    methods["segmental"] = evaluate_com_errors(pairs, lambda p: dempster_com(p, com_model))
    if args.models:
        for model_path in sorted(Path(args.models).glob("comnet_*.npz")):
            params = load_model_params(model_path)
            name = model_path.stem
            methods[name] = evaluate_com_errors(
                pairs, lambda p, _params=params: comnet_forward(p, _params, "eval")
            )
    stats = {name: error_stats(errs) for name, errs in methods.items()}
    rows = [
        [name, s.mean, s.std, s.median, s.rstd, s.n] for name, s in stats.items()
    ]
    write_table_csv(
        out / "com_eval.csv",
        ["method", "mean_mm", "std_mm", "median_mm", "rstd_mm", "n"],
        rows,
    )
    write_report_json(
        out / "com_eval.json",
        {"methods": {name: {"mean_mm": s.mean, "median_mm": s.median} for name, s in stats.items()}},
        _run_config(args, "com-eval"),
    )
    figures.save_com_error_figure(out / "com_eval.png", stats)
    for name, s in stats.items():
        print(f"{name}: mean {s.mean:.2f} ({s.std:.2f}) mm, median {s.median:.2f} ({s.rstd:.2f}) mm")
    return 0


def cmd_stability(args) -> int:
    out = _outdir(args)
    channels = ChannelSelection.from_label(args.channels)
    takes = _load_dataset(args.dataset, args.rate)
    config = _run_config(args, "stability")
    for take in takes:
        series = compute_series(take, channels, args.threshold)
        base = out / f"{take.subject_id}_{take.take_id}_{channels.label}"
        write_series(base, series, config=config)
        figures.save_series_figure(base.with_suffix(".png"), series)
        print(
            f"{take.subject_id}/{take.take_id}: {int(series.valid_mask().sum())}"
            f"/{series.n_frames} valid frames -> {base.name}.csv/.json/.png"
        )
    return 0


def cmd_sweep(args) -> int:
    out = _outdir(args)
    takes = _load_dataset(args.dataset, args.rate)
    thresholds = _parse_thresholds(args.thresholds)
    metrics = ["cop_error", "bos_iou"] if args.metric == "both" else [args.metric]
    config = _run_config(args, "sweep")
    config["thresholds"] = list(thresholds)
    for metric in metrics:
        result = threshold_sweep(takes, args.localization, metric, thresholds)
        header = ["threshold_kpa", "overall_mean", "overall_median", "n_valid"] + [
            f"subject_{sid}_mean" for sid in sorted(result.per_subject)
        ]
        rows = []
        for i, thr in enumerate(result.thresholds):
            row = [thr, result.overall_mean[i], result.overall_median[i], result.n_valid[i]]
            row += [result.per_subject[sid][i] for sid in sorted(result.per_subject)]
            rows.append(row)
        base = out / f"sweep_{metric}_{args.localization}"
        write_table_csv(base.with_suffix(".csv"), header, rows)
        write_report_json(
            base.with_suffix(".json"),
            {
                "metric": metric,
                "localization": args.localization,
                "thresholds": list(result.thresholds),
                "overall_mean": result.overall_mean,
                "overall_median": result.overall_median,
            },
            config,
        )
        figures.save_sweep_figure(base.with_suffix(".png"), result)
        print(f"sweep {metric}/{args.localization}: wrote {base.name}.csv/.json/.png")
    return 0


def cmd_study(args) -> int:
    out = _outdir(args)
    takes = _load_dataset(args.dataset, args.rate)
    channels = _parse_channels(args.channels)
    result = combinatorial_study(
        takes,
        channels,
        threshold=args.threshold,
        min_valid_fraction=args.min_valid_fraction,
    )
    rows = [
        [c.metric, c.channels, c.r_mean, c.r_std, c.p_max, c.mae, c.mae_std,
         c.n_frames, c.n_groups]
        for c in result.cells
    ]
    write_table_csv(
        out / "study.csv",
        ["metric", "channels", "r_mean", "r_std", "p_max", "mae_mm", "mae_std_mm",
         "n_frames", "n_groups"],
        rows,
    )
    write_report_json(
        out / "study.json",
        {
            "excluded_takes": list(result.excluded_takes),
            "cells": [
                {
                    "metric": c.metric,
                    "channels": c.channels,
                    "r_mean": c.r_mean,
                    "r_std": c.r_std,
                    "p_max": c.p_max,
                    "mae_mm": c.mae,
                    "mae_std_mm": c.mae_std,
                }
                for c in result.cells
            ],
        },
        _run_config(args, "study"),
    )
    figures.save_study_figure(out / "study.png", result)
    for c in result.cells:
        print(
            f"{c.metric:10s} {c.channels}: r {c.r_mean:+.3f} ({c.r_std:.3f}), "
            f"MAE {c.mae:.2f} ({c.mae_std:.2f}) mm"
        )
    return 0


def cmd_trend(args) -> int:
    out = _outdir(args)
    config = _run_config(args, "trend")
    for series_path in args.series:
        raw = read_series(series_path)
        trend = lowpass_trend(raw, args.cutoff)
        base = out / (Path(series_path).stem + "_trend")
        write_series(base, trend, config=config)
        figures.save_trend_figure(base.with_suffix(".png"), raw, trend, args.cutoff)
        print(f"{Path(series_path).name}: trend -> {base.name}.csv/.json/.png")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabilikit",
        description="Stability components (CoM, CoP, BoS) and metrics from pose and plantar pressure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--outdir", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (env STABILIKIT_SEED overrides)")
        p.add_argument("--rate", type=float, default=5.0, help="working sample rate (Hz)")

    p = sub.add_parser("synth", help="generate a synthetic dataset with exact labels")
    add_common(p)
    p.add_argument("--subjects", type=int, default=4)
    p.add_argument("--takes-per-subject", type=int, default=2, dest="takes_per_subject")
    p.add_argument("--duration", type=float, default=20.0, help="seconds per take")
    p.add_argument("--programs", default=",".join(MOTION_PROGRAMS))
    p.add_argument("--noise-px", type=float, default=0.0, dest="noise_px")
    p.add_argument("--noise-mm", type=float, default=0.0, dest="noise_mm")
    p.add_argument("--noise-kpa", type=float, default=0.0, dest="noise_kpa")
    p.add_argument("--com-noise-mm", type=float, default=0.0, dest="com_noise_mm")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("triangulate", help="two-view triangulation report for a dataset")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--min-confidence", type=float, default=0.1, dest="min_confidence")
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("train-com", help="leave-one-subject-out CoM regressor training")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--pose-stream", default="HP", dest="pose_stream",
                   choices=["GT", "IM", "HP", "OP"])
    p.add_argument("--width", type=int, default=3072)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--batch-size", type=int, default=256, dest="batch_size")
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--max-splits", type=int, default=None, dest="max_splits",
                   help="train only the first N splits")
    p.set_defaults(func=cmd_train_com)

    p = sub.add_parser("com-eval", help="CoM error statistics per estimation method")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--pose-stream", default="HP", dest="pose_stream",
                   choices=["GT", "IM", "HP", "OP"])
    p.add_argument("--models", default=None, help="directory of trained comnet_*.npz")
    p.set_defaults(func=cmd_com_eval)

    p = sub.add_parser("stability", help="per-take stability metric series")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--channels", default="GT-GT-GT", help="pressure-localization-CoM provenance")
    p.add_argument("--threshold", type=float, default=10.0, help="pressure threshold (kPa)")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("sweep", help="threshold sweeps of CoP error / BoS IoU")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--localization", default="HP", choices=["GT", "IM", "HP", "OP"])
    p.add_argument("--metric", default="both", choices=["cop_error", "bos_iou", "both"])
    p.add_argument(
        "--thresholds",
        default="0:30:2.5",
        help="start:stop:step or comma-separated kPa values",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("study", help="combinatorial GT/IM correlation study")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--channels", default="all", help="'all' or comma list like GT-GT-GT,GT-IM-IM")
    p.add_argument("--threshold", type=float, default=10.0)
    p.add_argument("--min-valid-fraction", type=float, default=0.9, dest="min_valid_fraction")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("trend", help="zero-phase low-pass trend of stability series")
    add_common(p)
    p.add_argument("--series", nargs="+", required=True, help="series CSV file(s)")
    p.add_argument("--cutoff", type=float, default=0.2, help="cutoff frequency (Hz)")
    p.set_defaults(func=cmd_trend)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.resolved_seed = _resolve_seed(args)
        return args.func(args)
    except StabilikitError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
