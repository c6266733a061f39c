import numpy as np
import pytest

from stabilikit.dempster import ComModel, Segment, dempster_com, load_com_model
from stabilikit.errors import MissingObservation
from stabilikit.pose import LAYOUTS, Pose3dFrame


def gt_pose(positions=None):
    lay = LAYOUTS["GT"]
    pos = np.zeros((lay.n_joints, 3)) if positions is None else positions
    return Pose3dFrame(0, lay, pos, np.ones(lay.n_joints, dtype=bool))


class TestModelValidation:
    def test_bundled_tables_sum_to_one(self):
        for layout_name in ("GT", "HP"):
            model = load_com_model(layout_name=layout_name)
            assert abs(sum(s.mass_fraction for s in model.segments) - 1.0) <= 1e-6
            for s in model.segments:
                assert 0.0 <= s.com_position_ratio <= 1.0

    def test_bad_sum_rejected(self):
        with pytest.raises(ValueError):
            ComModel("bad", (Segment("a", "left_hip", "left_knee", 0.9, 0.5),))

    def test_bundled_joints_exist_in_layout(self):
        for layout_name in ("GT", "HP"):
            model = load_com_model(layout_name=layout_name)
            assert model.joints() <= set(LAYOUTS[layout_name].joints)


class TestDempsterCom:
    def test_single_segment_midpoint(self):
        model = ComModel("one", (Segment("leg", "left_hip", "left_knee", 1.0, 0.5),))
        lay = LAYOUTS["GT"]
        pos = np.zeros((lay.n_joints, 3))
        pos[lay.index("left_hip")] = [0, 0, 0]
        pos[lay.index("left_knee")] = [0, 0, 1000]
        com = dempster_com(gt_pose(pos), model)
        assert com.as_array().tolist() == [0, 0, 500]

    def test_two_perpendicular_segments_hand_computed(self):
        model = ComModel(
            "two",
            (
                Segment("a", "left_hip", "left_knee", 0.5, 0.5),
                Segment("b", "left_knee", "left_ankle", 0.5, 0.5),
            ),
        )
        lay = LAYOUTS["GT"]
        pos = np.zeros((lay.n_joints, 3))
        pos[lay.index("left_hip")] = [0, 0, 0]
        pos[lay.index("left_knee")] = [1000, 0, 0]
        pos[lay.index("left_ankle")] = [1000, 1000, 0]
        # by hand: 0.5*(500,0,0) + 0.5*(1000,500,0) = (750, 250, 0)
        com = dempster_com(gt_pose(pos), model)
        assert com.as_array().tolist() == [750, 250, 0]

    def test_symmetric_t_pose_on_sagittal_plane(self):
        model = load_com_model(layout_name="GT")
        lay = LAYOUTS["GT"]
        pos = np.zeros((lay.n_joints, 3))
        mirror = {"left": +1.0, "right": -1.0}
        for side, sx in mirror.items():
            pos[lay.index(f"{side}_shoulder")] = [sx * 200, 0, 1400]
            pos[lay.index(f"{side}_elbow")] = [sx * 500, 0, 1400]
            pos[lay.index(f"{side}_wrist")] = [sx * 800, 0, 1400]
            pos[lay.index(f"{side}_hip")] = [sx * 100, 0, 900]
            pos[lay.index(f"{side}_knee")] = [sx * 100, 0, 500]
            pos[lay.index(f"{side}_ankle")] = [sx * 100, 0, 80]
            pos[lay.index(f"{side}_toe")] = [sx * 100, 200, 20]
            pos[lay.index(f"{side}_heel")] = [sx * 100, -60, 20]
        pos[lay.index("pelvis")] = [0, 0, 900]
        pos[lay.index("spine")] = [0, 0, 1050]
        pos[lay.index("thorax")] = [0, 0, 1250]
        pos[lay.index("neck")] = [0, 0, 1400]
        pos[lay.index("head")] = [0, 0, 1550]
        com = dempster_com(gt_pose(pos), model)
        assert abs(com.x) < 1e-9

    def test_missing_joint_listed(self):
        model = load_com_model(layout_name="GT")
        pose = gt_pose()
        pose.valid[pose.layout.index("left_knee")] = False
        with pytest.raises(MissingObservation, match="left_knee"):
            dempster_com(pose, model)

    def test_translation_equivariance(self):
        model = load_com_model(layout_name="GT")
        rng = np.random.default_rng(12)
        pos = rng.uniform(-500, 500, size=(21, 3))
        t = np.array([123.0, -45.0, 67.0])
        c0 = dempster_com(gt_pose(pos), model).as_array()
        c1 = dempster_com(gt_pose(pos + t), model).as_array()
        assert np.allclose(c1, c0 + t, atol=1e-9)
