import math

import numpy as np
import pytest

from dnfcurio.errors import PoseError, UndefinedAngleError
from dnfcurio.world import (COLOR_FEATURES, KINDS, ContactModel, TableObject, WorldState, color_feature,
                            execute_motion, feature_to_angle, feature_to_workspace, goal_angle_feature,
                            record_path, respawn_if_unreachable, workspace_to_feature)


def test_color_features_distinct():
    assert sorted(COLOR_FEATURES) == sorted(KINDS)
    assert len(set(COLOR_FEATURES.values())) == 3
    with pytest.raises(ValueError):
        color_feature("pyramid")


@pytest.mark.parametrize("d,expected", [((1, 0), 50.0), ((0, 1), 75.0), ((-1, 0), 100.0), ((0, -1), 25.0)])
def test_angle_feature(d, expected):
    assert goal_angle_feature((0, 0), d) == pytest.approx(expected)


def test_angle_feature_round_trip():
    for f in (1.0, 33.3, 50.0, 99.0):
        a = feature_to_angle(f)
        assert goal_angle_feature((0, 0), (math.cos(a), math.sin(a))) == pytest.approx(f)


def test_angle_undefined_without_motion():
    with pytest.raises(UndefinedAngleError):
        goal_angle_feature((0.2, 0.2), (0.2, 0.2))


def test_workspace_mapping_round_trip():
    w = WorldState.single("cube")
    p = np.array([12.5, 80.0])
    np.testing.assert_allclose(workspace_to_feature(w, feature_to_workspace(w, p)), p)
    with pytest.raises(PoseError):
        feature_to_workspace(w, [101.0, 5.0])
    with pytest.raises(PoseError):
        workspace_to_feature(w, [0.7, 0.1])


def test_miss_leaves_world_unchanged():
    w = WorldState.single("cube")
    before = w.object_pos.copy()
    out, _ = execute_motion(w, [[0.05, 0.5]])
    assert not out.moved and out.goal_angle_feature is None
    assert np.array_equal(w.object_pos, before)


def test_straight_cube_push_follows_heading():
    w = WorldState.single("cube", contact=ContactModel(cube_noise=0.0))
    out, _ = execute_motion(w, [w.center + [0.0, 0.1]])
    assert out.moved and out.kind == "cube"
    assert out.goal_angle_feature == pytest.approx(75.0)
    assert np.linalg.norm(out.post_pos - out.pre_pos) == pytest.approx(w.contact.push_distance)


def test_ball_deflects_with_offset():
    w = WorldState.single("ball", contact=ContactModel(ball_noise=0.0))
    c = w.center.copy()
    left, _ = execute_motion(w, [[c[0] - 0.015, 0.02], [c[0] - 0.015, 0.5]])
    w = WorldState.single("ball", contact=ContactModel(ball_noise=0.0))
    right, _ = execute_motion(w, [[c[0] + 0.015, 0.02], [c[0] + 0.015, 0.5]])
    assert left.goal_angle_feature < 75.0 < right.goal_angle_feature


def test_pose_outside_workspace():
    with pytest.raises(PoseError):
        execute_motion(WorldState.single("cube"), [[0.9, 0.1]])
    with pytest.raises(PoseError):
        execute_motion(WorldState.single("cube"), [])


def test_respawn():
    w = WorldState(objects=[TableObject("cube", [0.7, 0.7])])
    respawn_if_unreachable(w)
    assert np.array_equal(w.object_pos, w.center)


def test_recorded_path_is_a_demo():
    w = WorldState.single("cube")
    _, tr = execute_motion(w, [[0.1, 0.3], [0.5, 0.3]], record=True)
    assert tr.t.shape[0] == w.record_samples
    np.testing.assert_allclose(tr.x[0], w.effector_rest)
    np.testing.assert_allclose(tr.x[-1], [0.5, 0.3])


def test_degenerate_record_path():
    tr = record_path(np.array([[0.1, 0.1], [0.1, 0.1]]), 1.0, 5)
    assert np.all(tr.x == 0.1)


def test_seeded_outcomes_repeat():
    outs = []
    for _ in range(2):
        w = WorldState.single("cylinder", seed=4)
        outs.append([execute_motion(w, [w.center + [0.02, 0.1]])[0].goal_angle_feature for _ in range(5)])
    assert outs[0] == outs[1]
