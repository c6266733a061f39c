"""File formats, take manifests, and loading with decimation and alignment.

All formats are plain CSV/JSON, versioned with a leading format_version
field. Floats are written with repr, so write-then-read round-trips values
bit-exactly and repeated runs produce byte-identical files. Units are fixed:
mm, kPa, seconds, Hz.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .comnet import MlpParams
from .errors import AlignmentError, ExcludedTake, ParseError
from .geometry import Point3
from .pose import LAYOUTS, CameraProjection, Pose2dFrame, Pose3dFrame, assemble_hybrid_pose, triangulate_frame
from .pressure import PressureMap
from .stability import ChannelSelection, StabilityFrame, StabilitySeries, TakeStreams

FORMAT_VERSION = 1
DEFAULT_TARGET_RATE_HZ = 5.0


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_lines(path, lines):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _header_lines(stream: str, **meta) -> list:
    lines = [f"# format_version={FORMAT_VERSION}", f"# stream={stream}"]
    for k, v in meta.items():
        lines.append(f"# {k}={v}")
    return lines


def _read_meta(path) -> dict:
    """Leading '# key=value' lines of a headered CSV."""
    meta = {}
    try:
        with open(path) as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
    except OSError as exc:
        raise ParseError(path, 0, str(exc)) from exc
    return meta


def _read_csv(path):
    """Split a headered CSV into (meta dict, header row, data rows)."""
    meta = {}
    header = None
    rows = []
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        meta[k.strip()] = v.strip()
                    continue
                if header is None:
                    header = line.split(",")
                    continue
                rows.append((lineno, line.split(",")))
    except OSError as exc:
        raise ParseError(path, 0, str(exc)) from exc
    if header is None:
        raise ParseError(path, 0, "no header row")
    return meta, header, rows


# ---------------------------------------------------------------------------
# pose files


def write_pose3d(path, frames: Sequence[Pose3dFrame], sample_rate_hz: float):
    lay = frames[0].layout
    lines = _header_lines("pose3d", layout=lay.name, sample_rate_hz=_fmt(sample_rate_hz))
    lines.append("frame,joint,x,y,z,valid")
    for f in frames:
        for j, name in enumerate(lay.joints):
            p = f.positions[j]
            ok = int(f.valid[j])
            lines.append(f"{f.frame_index},{name},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])},{ok}")
    _write_lines(path, lines)


def _count_preamble(path) -> int:
    n = 0
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                n += 1
            else:
                break
    return n


def _numeric_table(path, want_columns):
    """Fast CSV body parse; reports the first bad cell's line number."""
    try:
        df = pd.read_csv(path, comment="#", header=0, dtype={"joint": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as exc:
        raise ParseError(path, 0, str(exc)) from exc
    if list(df.columns) != want_columns:
        raise ParseError(path, 0, f"unexpected columns {list(df.columns)}")
    first_data_line = _count_preamble(path) + 2
    for col in want_columns:
        if col == "joint":
            continue
        vals = pd.to_numeric(df[col], errors="coerce")
        if vals.isna().any():
            lineno = first_data_line + int(np.flatnonzero(vals.isna().to_numpy())[0])
            raise ParseError(path, lineno, f"bad numeric value in column {col!r}")
        df[col] = vals
    return df


def _frames_in_layout_order(path, df, lay):
    """Group a per-(frame, joint) table into per-frame arrays in layout order."""
    unknown = set(df["joint"]) - set(lay.joints)
    if unknown:
        raise ParseError(path, 0, f"joints {sorted(unknown)[:3]} not in layout {lay.name}")
    order = {name: i for i, name in enumerate(lay.joints)}
    df = df.assign(_slot=df["joint"].map(order)).sort_values(
        ["frame", "_slot"], kind="stable"
    )
    n = lay.n_joints
    for idx, group in df.groupby("frame", sort=True):
        if len(group) != n or list(group["_slot"]) != list(range(n)):
            present = set(group["joint"])
            missing = [j for j in lay.joints if j not in present]
            raise ParseError(path, 0, f"frame {idx} is missing joints {missing[:3]}")
        yield int(idx), group


def read_pose3d(path):
    """Returns (layout_name, sample_rate, list[Pose3dFrame] sorted by frame)."""
    meta = _read_meta(path)
    layout_name = meta.get("layout")
    if layout_name not in LAYOUTS:
        raise ParseError(path, 0, f"unknown layout {layout_name!r}")
    lay = LAYOUTS[layout_name]
    rate = float(meta.get("sample_rate_hz", DEFAULT_TARGET_RATE_HZ))
    df = _numeric_table(path, ["frame", "joint", "x", "y", "z", "valid"])
    frames = []
    for idx, group in _frames_in_layout_order(path, df, lay):
        pos = group[["x", "y", "z"]].to_numpy(dtype=np.float64)
        valid = group["valid"].to_numpy().astype(bool)
        frames.append(Pose3dFrame(idx, lay, pos, valid, timestamp=idx / rate))
    return layout_name, rate, frames


def write_pose2d(path, frames: Sequence[Pose2dFrame], sample_rate_hz: float):
    lay = frames[0].layout
    cam = frames[0].camera_id
    lines = _header_lines(
        "pose2d", layout=lay.name, camera=cam, sample_rate_hz=_fmt(sample_rate_hz)
    )
    lines.append("frame,joint,u,v,conf,valid")
    for f in frames:
        for j, name in enumerate(lay.joints):
            lines.append(
                f"{f.frame_index},{name},{_fmt(f.uv[j, 0])},{_fmt(f.uv[j, 1])},"
                f"{_fmt(f.confidence[j])},{int(f.valid[j])}"
            )
    _write_lines(path, lines)


def read_pose2d(path):
    meta = _read_meta(path)
    lay = LAYOUTS.get(meta.get("layout"))
    if lay is None:
        raise ParseError(path, 0, f"unknown layout {meta.get('layout')!r}")
    cam = meta.get("camera", "cam")
    rate = float(meta.get("sample_rate_hz", DEFAULT_TARGET_RATE_HZ))
    df = _numeric_table(path, ["frame", "joint", "u", "v", "conf", "valid"])
    frames = []
    for idx, group in _frames_in_layout_order(path, df, lay):
        uv = group[["u", "v"]].to_numpy(dtype=np.float64)
        conf = group["conf"].to_numpy(dtype=np.float64)
        valid = group["valid"].to_numpy().astype(bool)
        frames.append(Pose2dFrame(idx, cam, lay, uv, conf, valid))
    return cam, rate, frames


def write_calibration(path, cameras: Sequence[CameraProjection]):
    payload = {
        "format_version": FORMAT_VERSION,
        "cameras": {c.camera_id: {"P": c.P.tolist()} for c in cameras},
    }
    _write_lines(path, [json.dumps(payload, indent=2, sort_keys=True)])


def read_calibration(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(path, 0, str(exc)) from exc
    try:
        return {
            cam_id: CameraProjection(cam_id, np.array(spec["P"], dtype=np.float64))
            for cam_id, spec in payload["cameras"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(path, 0, f"bad calibration payload: {exc}") from exc


# ---------------------------------------------------------------------------
# pressure files: one JSON header line, then per-frame blocks


def write_pressure(path, maps: Sequence[PressureMap], sample_rate_hz: float):
    first = maps[0]
    header = {
        "format_version": FORMAT_VERSION,
        "stream": "pressure",
        "rows": first.rows,
        "cols": first.cols,
        "cell_size_mm": first.cell_size,
        "side": first.side,
        "sample_rate_hz": sample_rate_hz,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for pm in maps:
        lines.append(f"frame,{pm.frame_index}")
        for r in range(pm.rows):
            lines.append(",".join(_fmt(v) for v in pm.values[r]))
    _write_lines(path, lines)


def read_pressure(path):
    """Returns (side, sample_rate, list[PressureMap] sorted by frame)."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(path, 0, str(exc)) from exc
    if not lines:
        raise ParseError(path, 0, "empty pressure file")
    try:
        header = json.loads(lines[0])
        rows, cols = int(header["rows"]), int(header["cols"])
        cell = float(header["cell_size_mm"])
        side = header["side"]
        rate = float(header.get("sample_rate_hz", DEFAULT_TARGET_RATE_HZ))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ParseError(path, 1, f"bad pressure header: {exc}") from exc
    maps = []
    i = 1
    while i < len(lines):
        if not lines[i].startswith("frame,"):
            raise ParseError(path, i + 1, "expected a frame sentinel row")
        try:
            idx = int(lines[i].split(",", 1)[1])
        except ValueError as exc:
            raise ParseError(path, i + 1, str(exc)) from exc
        block = lines[i + 1 : i + 1 + rows]
        if len(block) != rows:
            raise ParseError(path, i + 1, f"frame {idx}: truncated block")
        try:
            values = np.array([[float(c) for c in line.split(",")] for line in block])
        except ValueError as exc:
            raise ParseError(path, i + 2, str(exc)) from exc
        if values.shape != (rows, cols):
            raise ParseError(path, i + 2, f"frame {idx}: expected {rows}x{cols} values")
        maps.append(PressureMap(side, rows, cols, cell, values, idx))
        i += 1 + rows
    maps.sort(key=lambda m: m.frame_index)
    return side, rate, maps


# ---------------------------------------------------------------------------
# CoM label files


def write_com(path, entries, sample_rate_hz: float):
    """entries: iterable of (frame_index, Point3 | None)."""
    lines = _header_lines("com3d", sample_rate_hz=_fmt(sample_rate_hz))
    lines.append("frame,x,y,z,valid")
    for idx, com in entries:
        if com is None:
            lines.append(f"{idx},0.0,0.0,0.0,0")
        else:
            lines.append(f"{idx},{_fmt(com.x)},{_fmt(com.y)},{_fmt(com.z)},1")
    _write_lines(path, lines)


def read_com(path):
    meta, header, rows = _read_csv(path)
    if header != ["frame", "x", "y", "z", "valid"]:
        raise ParseError(path, 0, f"unexpected com columns {header}")
    rate = float(meta.get("sample_rate_hz", DEFAULT_TARGET_RATE_HZ))
    out = []
    for lineno, cells in rows:
        try:
            idx = int(cells[0])
            ok = bool(int(cells[4]))
            com = Point3(*(float(c) for c in cells[1:4])) if ok else None
        except (ValueError, IndexError) as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        out.append((idx, com))
    out.sort(key=lambda e: e[0])
    return rate, out


# ---------------------------------------------------------------------------
# manifests


@dataclass
class TakeManifest:
    subject_id: str
    take_id: str
    sample_rate_hz: float
    files: dict  # role -> relative path (pose2d role maps camera -> path)
    excluded: bool = False
    exclusion_reason: Optional[str] = None


def write_manifest(path, manifest: TakeManifest):
    payload = {"format_version": FORMAT_VERSION, **asdict(manifest)}
    _write_lines(path, [json.dumps(payload, indent=2, sort_keys=True)])


def read_manifest(path) -> TakeManifest:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(path, 0, str(exc)) from exc
    try:
        return TakeManifest(
            subject_id=payload["subject_id"],
            take_id=payload["take_id"],
            sample_rate_hz=float(payload["sample_rate_hz"]),
            files=payload["files"],
            excluded=bool(payload.get("excluded", False)),
            exclusion_reason=payload.get("exclusion_reason"),
        )
    except KeyError as exc:
        raise ParseError(path, 0, f"manifest missing field {exc}") from exc


def _decimate(items, key, factor: int):
    return [x for x in items if key(x) % factor == 0]


def _check_alignment(path_label: str, got, want):
    if got != want:
        for i, (a, b) in enumerate(zip(got, want)):
            if a != b:
                raise AlignmentError(f"{path_label} disagrees with the take's frame set", index=a)
        shorter = min(len(got), len(want))
        missing = want[shorter] if len(want) > len(got) else got[shorter]
        raise AlignmentError(f"{path_label} disagrees with the take's frame set", index=missing)


def load_take(
    manifest_path,
    *,
    target_rate_hz: float = DEFAULT_TARGET_RATE_HZ,
    min_confidence: float = 0.1,
) -> TakeStreams:
    """Load, decimate and align every stream a manifest references.

    Decimation keeps every k-th frame (no anti-alias filter) where k is the
    integer ratio of the recorded rate to target_rate_hz. If 2D poses plus a
    calibration are present, a vision 3D stream is triangulated, and combined
    with the corrected 12-joint stream into a hybrid stream when available.
    """
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    if manifest.excluded:
        reason = manifest.exclusion_reason or "no reason given"
        raise ExcludedTake(f"take {manifest.take_id} is excluded: {reason}")
    base = manifest_path.parent

    def resolve(rel):
        p = base / rel
        if not p.exists():
            raise ParseError(str(p), 0, "referenced file does not exist")
        return p

    raw_rate = manifest.sample_rate_hz
    factor = raw_rate / target_rate_hz
    if abs(factor - round(factor)) > 1e-9 or factor < 1:
        raise AlignmentError(
            f"recorded rate {raw_rate} Hz is not an integer multiple of {target_rate_hz} Hz"
        )
    factor = int(round(factor))

    files = manifest.files
    streams = {}
    rates = {}

    def load_pose(role):
        if role not in files:
            return None
        _, rate, frames = read_pose3d(resolve(files[role]))
        rates[role] = rate
        kept = _decimate(frames, lambda f: f.frame_index, factor)
        for f in kept:
            f.timestamp = f.frame_index / raw_rate
        return kept

    gt_pose = load_pose("gt_pose")
    bp_pose = load_pose("bp_pose")
    im_pose = load_pose("im_pose")

    def load_press(role):
        if role not in files:
            return None
        side, rate, maps = read_pressure(resolve(files[role]))
        rates[role] = rate
        return _decimate(maps, lambda m: m.frame_index, factor)

    press_left = load_press("pressure_left")
    press_right = load_press("pressure_right")
    pred_left = load_press("predicted_pressure_left")
    pred_right = load_press("predicted_pressure_right")

    gt_com = None
    if "gt_com" in files:
        rate, entries = read_com(resolve(files["gt_com"]))
        rates["gt_com"] = rate
        gt_com = _decimate(entries, lambda e: e[0], factor)
    im_com = None
    if "im_com" in files:
        rate, entries = read_com(resolve(files["im_com"]))
        rates["im_com"] = rate
        im_com = _decimate(entries, lambda e: e[0], factor)

    op_pose = hp_pose = None
    if "pose2d" in files and "calibration" in files:
        cams = read_calibration(resolve(files["calibration"]))
        views = {}
        for cam_id, rel in sorted(files["pose2d"].items()):
            cam, rate, frames = read_pose2d(resolve(rel))
            rates[f"pose2d:{cam_id}"] = rate
            views[cam_id] = _decimate(frames, lambda f: f.frame_index, factor)
        if len(views) >= 2:
            a_id, b_id = sorted(views)[:2]
            op_pose = [
                triangulate_frame(fa, fb, cams, min_confidence=min_confidence, sample_rate_hz=raw_rate)
                for fa, fb in zip(views[a_id], views[b_id])
            ]
            if bp_pose is not None:
                hp_pose = [
                    assemble_hybrid_pose(bp, op) for bp, op in zip(bp_pose, op_pose)
                ]

    for role, rate in rates.items():
        if abs(rate - raw_rate) > 1e-9:
            raise AlignmentError(
                f"stream {role} was recorded at {rate} Hz but the manifest says {raw_rate} Hz"
            )

    # establish the take's frame set from the first available stream
    candidates = {
        "pressure_left": [m.frame_index for m in press_left] if press_left else None,
        "pressure_right": [m.frame_index for m in press_right] if press_right else None,
        "gt_pose": [f.frame_index for f in gt_pose] if gt_pose else None,
    }
    reference = next((v for v in candidates.values() if v), None)
    if reference is None:
        raise ParseError(str(manifest_path), 0, "manifest references no loadable streams")

    named = {
        "gt_pose": [f.frame_index for f in gt_pose] if gt_pose else None,
        "bp_pose": [f.frame_index for f in bp_pose] if bp_pose else None,
        "im_pose": [f.frame_index for f in im_pose] if im_pose else None,
        "pressure_left": [m.frame_index for m in press_left] if press_left else None,
        "pressure_right": [m.frame_index for m in press_right] if press_right else None,
        "predicted_pressure_left": [m.frame_index for m in pred_left] if pred_left else None,
        "predicted_pressure_right": [m.frame_index for m in pred_right] if pred_right else None,
        "gt_com": [e[0] for e in gt_com] if gt_com else None,
        "im_com": [e[0] for e in im_com] if im_com else None,
        "op_pose": [f.frame_index for f in op_pose] if op_pose else None,
    }
    for label, idxs in named.items():
        if idxs is not None:
            _check_alignment(label, idxs, reference)

    return TakeStreams(
        take_id=manifest.take_id,
        subject_id=manifest.subject_id,
        sample_rate=target_rate_hz,
        frame_indices=np.array(reference),
        gt_pose=gt_pose,
        gt_pressure_left=press_left,
        gt_pressure_right=press_right,
        gt_com=[c for _, c in gt_com] if gt_com else None,
        im_pose=im_pose,
        im_pressure_left=pred_left,
        im_pressure_right=pred_right,
        im_com=[c for _, c in im_com] if im_com else None,
        op_pose=op_pose,
        hp_pose=hp_pose,
    )


def discover_manifests(dataset_dir) -> list:
    """All manifest.json files under a dataset directory, sorted."""
    return sorted(Path(dataset_dir).glob("**/manifest.json"))


def write_synth_take(
    out_dir,
    gt_take,
    cameras: Sequence[CameraProjection],
    *,
    im_take=None,
    im_com_stream: Optional[Sequence] = None,
) -> Path:
    """Write one generated take as a full on-disk take; returns the manifest path.

    GT streams always come from gt_take. When a degraded twin is given, its
    pose becomes the image-based pose stream, its pressure the predicted
    pressure stream, and its 2D detections the per-camera detection files.
    An explicit CoM stream, when given, is written as the image-based CoM.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rate = gt_take.sample_rate
    im = im_take or gt_take

    write_pose3d(out_dir / "gt_pose.csv", [f.gt_pose for f in gt_take.frames], rate)
    write_pose3d(out_dir / "bp_pose.csv", [f.bp_pose for f in im.frames], rate)
    write_pose3d(out_dir / "im_pose.csv", [f.gt_pose for f in im.frames], rate)
    write_com(out_dir / "gt_com.csv", [(f.index, f.com) for f in gt_take.frames], rate)
    write_pressure(out_dir / "pressure_left.csv", [f.pressure_left for f in gt_take.frames], rate)
    write_pressure(out_dir / "pressure_right.csv", [f.pressure_right for f in gt_take.frames], rate)
    write_pressure(out_dir / "predicted_pressure_left.csv", [f.pressure_left for f in im.frames], rate)
    write_pressure(out_dir / "predicted_pressure_right.csv", [f.pressure_right for f in im.frames], rate)
    write_calibration(out_dir / "calibration.json", cameras)
    pose2d_files = {}
    for cam in cameras:
        fname = f"pose2d_{cam.camera_id}.csv"
        write_pose2d(out_dir / fname, [f.pose2d[cam.camera_id] for f in im.frames], rate)
        pose2d_files[cam.camera_id] = fname
    files = {
        "gt_pose": "gt_pose.csv",
        "bp_pose": "bp_pose.csv",
        "im_pose": "im_pose.csv",
        "gt_com": "gt_com.csv",
        "pressure_left": "pressure_left.csv",
        "pressure_right": "pressure_right.csv",
        "predicted_pressure_left": "predicted_pressure_left.csv",
        "predicted_pressure_right": "predicted_pressure_right.csv",
        "calibration": "calibration.json",
        "pose2d": pose2d_files,
    }
    if im_com_stream is not None:
        write_com(
            out_dir / "im_com.csv",
            [(f.index, c) for f, c in zip(gt_take.frames, im_com_stream)],
            rate,
        )
        files["im_com"] = "im_com.csv"
    manifest = TakeManifest(
        subject_id=gt_take.subject_id,
        take_id=gt_take.take_id,
        sample_rate_hz=rate,
        files=files,
    )
    manifest_path = out_dir / "manifest.json"
    write_manifest(manifest_path, manifest)
    return manifest_path


# ---------------------------------------------------------------------------
# model parameter container


def save_model_params(path, params: MlpParams):
    meta = {
        "format_version": FORMAT_VERSION,
        "layout_name": params.layout_name,
        "n_features": params.n_features,
        "width": params.width,
        "dropout_rate": params.dropout_rate,
        "bn_eps": params.bn_eps,
        "bn_momentum": params.bn_momentum,
    }
    arrays = {
        name: getattr(params, name)
        for name in (
            "w1", "b1", "gamma1", "beta1", "run_mean1", "run_var1",
            "w2", "b2", "gamma2", "beta2", "run_mean2", "run_var2",
            "w3", "b3", "feat_mean", "feat_std",
        )
    }
    np.savez(path, meta=json.dumps(meta, sort_keys=True), **arrays)


def load_model_params(path) -> MlpParams:
    try:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            arrays = {k: data[k] for k in data.files if k != "meta"}
    except (OSError, KeyError, json.JSONDecodeError, ValueError) as exc:
        raise ParseError(path, 0, f"bad model parameter file: {exc}") from exc
    return MlpParams(
        layout_name=meta["layout_name"],
        n_features=int(meta["n_features"]),
        width=int(meta["width"]),
        dropout_rate=float(meta["dropout_rate"]),
        bn_eps=float(meta["bn_eps"]),
        bn_momentum=float(meta["bn_momentum"]),
        **arrays,
    )


# ---------------------------------------------------------------------------
# stability series files


def write_series(path_base, series: StabilitySeries, config: Optional[dict] = None):
    """Write <base>.csv with per-frame values and <base>.json with a summary."""
    path_base = Path(path_base)
    lines = _header_lines(
        "stability_series",
        take=series.take_id,
        subject=series.subject_id,
        channels=series.channels.label,
        sample_rate_hz=_fmt(series.sample_rate),
    )
    lines.append("frame,time_s,com_x,com_y,cop_x,cop_y,com_to_cop_mm,com_to_bos_mm,valid,filtered")
    for f in series.frames:
        t = f.frame_index / series.sample_rate
        com = (f.com2d.x, f.com2d.y) if f.com2d is not None else ("", "")
        cop = (f.cop.x, f.cop.y) if f.cop is not None else ("", "")
        metrics = (
            (_fmt(f.com_to_cop), _fmt(f.com_to_bos)) if f.valid else ("", "")
        )
        filt = "" if f.filtered is None else str(int(f.filtered))
        cells = [
            str(f.frame_index),
            _fmt(t),
            _fmt(com[0]) if com[0] != "" else "",
            _fmt(com[1]) if com[1] != "" else "",
            _fmt(cop[0]) if cop[0] != "" else "",
            _fmt(cop[1]) if cop[1] != "" else "",
            metrics[0],
            metrics[1],
            str(int(f.valid)),
            filt,
        ]
        lines.append(",".join(cells))
    _write_lines(path_base.with_suffix(".csv"), lines)

    from .evaluation import error_stats

    summary = {}
    for name in ("com_to_cop", "com_to_bos"):
        vals = series.metric(name)
        vals = vals[~np.isnan(vals)]
        if vals.size:
            s = error_stats(vals)
            summary[name] = {
                "mean_mm": s.mean, "std_mm": s.std, "median_mm": s.median,
                "rstd_mm": s.rstd, "n": s.n,
            }
        else:
            summary[name] = None
    payload = {
        "format_version": FORMAT_VERSION,
        "take_id": series.take_id,
        "subject_id": series.subject_id,
        "channels": series.channels.label,
        "sample_rate_hz": series.sample_rate,
        "n_frames": series.n_frames,
        "n_valid": int(series.valid_mask().sum()),
        "summary": summary,
        "config": config or {},
    }
    _write_lines(path_base.with_suffix(".json"), [json.dumps(payload, indent=2, sort_keys=True)])


def read_series(path) -> StabilitySeries:
    meta, header, rows = _read_csv(path)
    want = "frame,time_s,com_x,com_y,cop_x,cop_y,com_to_cop_mm,com_to_bos_mm,valid,filtered"
    if header != want.split(","):
        raise ParseError(path, 0, f"unexpected series columns {header}")
    frames = []
    from .geometry import Point2

    for lineno, cells in rows:
        try:
            idx = int(cells[0])
            valid = bool(int(cells[8]))
            com2d = Point2(float(cells[2]), float(cells[3])) if cells[2] else None
            cop = Point2(float(cells[4]), float(cells[5])) if cells[4] else None
            c2c = float(cells[6]) if cells[6] else math.nan
            c2b = float(cells[7]) if cells[7] else math.nan
            filt = bool(int(cells[9])) if cells[9] != "" else None
        except (ValueError, IndexError) as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        frames.append(
            StabilityFrame(
                frame_index=idx,
                com2d=com2d,
                cop=cop,
                com_to_cop=c2c,
                com_to_bos=c2b,
                com_valid=valid,
                field_valid=valid,
                filtered=filt,
            )
        )
    return StabilitySeries(
        take_id=meta.get("take", "unknown"),
        sample_rate=float(meta.get("sample_rate_hz", DEFAULT_TARGET_RATE_HZ)),
        frames=frames,
        channels=ChannelSelection.from_label(meta.get("channels", "GT-GT-GT")),
        subject_id=meta.get("subject", ""),
    )


# ---------------------------------------------------------------------------
# report writers (CSV + JSON pairs, config embedded in the JSON)


def write_report_json(path, payload: dict, config: dict):
    body = {"format_version": FORMAT_VERSION, "config": config, **payload}
    _write_lines(path, [json.dumps(body, indent=2, sort_keys=True)])


def write_table_csv(path, header: Sequence[str], rows: Sequence[Sequence]):
    lines = [f"# format_version={FORMAT_VERSION}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) if isinstance(c, float) else str(c) for c in row))
    _write_lines(path, lines)
