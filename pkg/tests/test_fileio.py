import json

import numpy as np
import pytest

from stabilikit.comnet import TrainConfig, comnet_train, init_params
from stabilikit.errors import AlignmentError, ExcludedTake, ParseError
from stabilikit.fileio import (
    TakeManifest,
    discover_manifests,
    load_model_params,
    load_take,
    read_calibration,
    read_com,
    read_manifest,
    read_pose2d,
    read_pose3d,
    read_pressure,
    read_series,
    save_model_params,
    write_calibration,
    write_com,
    write_manifest,
    write_pose2d,
    write_pose3d,
    write_pressure,
    write_series,
    write_synth_take,
)
from stabilikit.geometry import Point3
from stabilikit.stability import compute_series
from stabilikit.synth import (
    NoiseSpec,
    default_rig,
    generate_take,
    noise_model,
    streams_from_take,
)


@pytest.fixture(scope="module")
def rig():
    return default_rig()


@pytest.fixture(scope="module")
def take(rig):
    return generate_take(rig, "sway", 6.0, subject_index=2)


class TestRoundTrips:
    def test_pose3d(self, tmp_path, take):
        frames = [f.gt_pose for f in take.frames]
        path = tmp_path / "pose.csv"
        write_pose3d(path, frames, take.sample_rate)
        layout, rate, got = read_pose3d(path)
        assert layout == "GT" and rate == take.sample_rate
        assert len(got) == len(frames)
        for a, b in zip(got, frames):
            assert a.frame_index == b.frame_index
            assert np.array_equal(a.positions, b.positions)
            assert np.array_equal(a.valid, b.valid)

    def test_pose2d(self, tmp_path, take):
        frames = [f.pose2d["cam_a"] for f in take.frames]
        path = tmp_path / "pose2d.csv"
        write_pose2d(path, frames, take.sample_rate)
        cam, rate, got = read_pose2d(path)
        assert cam == "cam_a"
        for a, b in zip(got, frames):
            assert np.array_equal(a.uv, b.uv)
            assert np.array_equal(a.confidence, b.confidence)
            assert np.array_equal(a.valid, b.valid)

    def test_pressure(self, tmp_path, take):
        maps = [f.pressure_left for f in take.frames]
        path = tmp_path / "pressure.csv"
        write_pressure(path, maps, take.sample_rate)
        side, rate, got = read_pressure(path)
        assert side == "left"
        for a, b in zip(got, maps):
            assert a.frame_index == b.frame_index
            assert np.array_equal(a.values, b.values)

    def test_calibration(self, tmp_path, rig):
        path = tmp_path / "calib.json"
        write_calibration(path, rig.cameras)
        cams = read_calibration(path)
        for cam in rig.cameras:
            assert np.array_equal(cams[cam.camera_id].P, cam.P)

    def test_com(self, tmp_path, take):
        entries = [(f.index, f.com) for f in take.frames]
        entries[3] = (entries[3][0], None)
        path = tmp_path / "com.csv"
        write_com(path, entries, take.sample_rate)
        rate, got = read_com(path)
        assert got[3][1] is None
        for (ia, ca), (ib, cb) in zip(got[4:], entries[4:]):
            assert ia == ib and ca == cb

    def test_model_params(self, tmp_path):
        params = init_params("HP", width=24, rng=np.random.default_rng(3))
        params.feat_mean = np.random.default_rng(4).normal(size=params.n_features)
        path = tmp_path / "model.npz"
        save_model_params(path, params)
        got = load_model_params(path)
        assert got.layout_name == "HP" and got.width == 24
        for name, arr in params.trainable().items():
            assert np.array_equal(arr, got.trainable()[name])
        assert np.array_equal(got.feat_mean, params.feat_mean)

    def test_series(self, tmp_path, take):
        series = compute_series(streams_from_take(take))
        base = tmp_path / "series"
        write_series(base, series, config={"threshold_kpa": 10.0})
        got = read_series(base.with_suffix(".csv"))
        assert got.take_id == series.take_id
        assert got.channels == series.channels
        assert np.array_equal(got.valid_mask(), series.valid_mask())
        a = got.metric("com_to_cop")
        b = series.metric("com_to_cop")
        assert np.array_equal(a, b, equal_nan=True)
        payload = json.loads(base.with_suffix(".json").read_text())
        assert payload["config"]["threshold_kpa"] == 10.0
        assert payload["n_valid"] == int(series.valid_mask().sum())

    def test_manifest(self, tmp_path):
        m = TakeManifest("S1", "T1", 25.0, {"gt_pose": "x.csv"}, True, "sensor glitch")
        path = tmp_path / "manifest.json"
        write_manifest(path, m)
        assert read_manifest(path) == m


class TestWriteLoadTake:
    def test_lossless_roundtrip(self, tmp_path, rig, take):
        manifest = write_synth_take(tmp_path / "t1", take, rig.cameras)
        streams = load_take(manifest, target_rate_hz=take.sample_rate)
        direct = streams_from_take(take)
        assert np.array_equal(streams.frame_indices, direct.frame_indices)
        for a, b in zip(streams.gt_pose, direct.gt_pose):
            assert np.array_equal(a.positions, b.positions)
        for a, b in zip(streams.gt_pressure_left, direct.gt_pressure_left):
            assert np.array_equal(a.values, b.values)
        for a, b in zip(streams.gt_com, direct.gt_com):
            assert a == b
        assert streams.op_pose is not None and streams.hp_pose is not None
        # byte-identical rewrite
        manifest2 = write_synth_take(tmp_path / "t2", take, rig.cameras)
        for f in sorted(p.name for p in (tmp_path / "t1").iterdir()):
            assert (tmp_path / "t1" / f).read_bytes() == (tmp_path / "t2" / f).read_bytes()

    def test_excluded_take_refused(self, tmp_path, rig, take):
        manifest_path = write_synth_take(tmp_path / "t1", take, rig.cameras)
        m = read_manifest(manifest_path)
        m.excluded = True
        m.exclusion_reason = "corrupt foot pressure data"
        write_manifest(manifest_path, m)
        with pytest.raises(ExcludedTake, match="corrupt foot pressure data"):
            load_take(manifest_path, target_rate_hz=take.sample_rate)

    def test_truncated_pressure_stream_misaligns(self, tmp_path, rig, take):
        manifest_path = write_synth_take(tmp_path / "t1", take, rig.cameras)
        maps = [f.pressure_left for f in take.frames][:-1]
        write_pressure(tmp_path / "t1" / "pressure_left.csv", maps, take.sample_rate)
        with pytest.raises(AlignmentError) as err:
            load_take(manifest_path, target_rate_hz=take.sample_rate)
        assert err.value.index == take.frames[-1].index

    def test_decimation(self, tmp_path, take):
        rig25 = default_rig(sample_rate=25.0)
        t25 = generate_take(rig25, "sway", 4.0, subject_index=1)
        manifest = write_synth_take(tmp_path / "t25", t25, rig25.cameras)
        streams = load_take(manifest, target_rate_hz=5.0)
        assert streams.sample_rate == 5.0
        assert np.array_equal(streams.frame_indices, np.arange(0, 100, 5))

    def test_non_integer_decimation_rejected(self, tmp_path, rig, take):
        manifest_path = write_synth_take(tmp_path / "t1", take, rig.cameras)
        with pytest.raises(AlignmentError):
            load_take(manifest_path, target_rate_hz=3.0)

    def test_missing_file_is_parse_error(self, tmp_path, rig, take):
        manifest_path = write_synth_take(tmp_path / "t1", take, rig.cameras)
        (tmp_path / "t1" / "gt_com.csv").unlink()
        with pytest.raises(ParseError, match="does not exist"):
            load_take(manifest_path, target_rate_hz=take.sample_rate)

    def test_noisy_twin_streams(self, tmp_path, rig, take):
        noisy = noise_model(take, NoiseSpec(joints_mm=5.0, pressure_kpa=3.0, seed=8))
        manifest = write_synth_take(
            tmp_path / "t1", take, rig.cameras, im_take=noisy,
            im_com_stream=[f.com for f in take.frames],
        )
        streams = load_take(manifest, target_rate_hz=take.sample_rate)
        assert streams.im_com is not None
        assert not np.array_equal(
            streams.im_pose[0].positions, streams.gt_pose[0].positions
        )
        assert not np.array_equal(
            streams.im_pressure_left[0].values, streams.gt_pressure_left[0].values
        )

    def test_discover_manifests(self, tmp_path, rig, take):
        write_synth_take(tmp_path / "a" / "t1", take, rig.cameras)
        write_synth_take(tmp_path / "b" / "t2", take, rig.cameras)
        assert len(discover_manifests(tmp_path)) == 2


class TestParseErrors:
    def test_pose3d_bad_layout(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# layout=XX\nframe,joint,x,y,z,valid\n")
        with pytest.raises(ParseError):
            read_pose3d(path)

    def test_pose3d_bad_value_reports_line(self, tmp_path, take):
        path = tmp_path / "bad.csv"
        write_pose3d(path, [take.frames[0].gt_pose], take.sample_rate)
        text = path.read_text().splitlines()
        text[5] = text[5].replace(text[5].split(",")[2], "not-a-number", 1)
        path.write_text("\n".join(text) + "\n")
        with pytest.raises(ParseError) as err:
            read_pose3d(path)
        assert err.value.line == 6

    def test_pressure_truncated_block(self, tmp_path, take):
        path = tmp_path / "bad.csv"
        write_pressure(path, [take.frames[0].pressure_left], take.sample_rate)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(ParseError, match="truncated"):
            read_pressure(path)

    def test_com_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            read_com(path)
