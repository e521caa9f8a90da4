import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnfcurio.errors import FitError, NumericError
from dnfcurio.motion import (DEFAULT_ALPHA, DmpSkill, Trajectory, basis_centers, learn_from_demo,
                             minimum_jerk, phase, rollout, skill_from_text, skill_to_text)

START, GOAL = np.array([0.3, 0.02]), np.array([0.25, 0.35])


@pytest.fixture(scope="module")
def demo():
    return minimum_jerk(START, GOAL, 2.0, 40)


@pytest.fixture(scope="module")
def skill(demo):
    return learn_from_demo(demo)


class TestPhase:
    def test_starts_at_one(self):
        assert phase(0.0, 2.0) == 1.0

    def test_strictly_decreasing(self):
        s = phase(np.linspace(0, 5, 200), 2.0)
        assert np.all(np.diff(s) < 0)

    def test_alpha_puts_one_percent_at_tau(self):
        assert DEFAULT_ALPHA == pytest.approx(4.605170186, abs=1e-9)
        assert phase(3.0, 3.0) == pytest.approx(0.01)


class TestTrajectory:
    def test_rejects_non_increasing_time(self):
        with pytest.raises(ValueError):
            Trajectory([0.0, 0.0], [[0, 0], [1, 1]])

    def test_rejects_single_sample(self):
        with pytest.raises(ValueError):
            Trajectory([0.0], [[0, 0]])

    def test_text_round_trip(self, demo, tmp_path):
        demo.save(tmp_path / "demo.txt")
        back = Trajectory.load(tmp_path / "demo.txt")
        assert np.array_equal(back.t, demo.t) and np.array_equal(back.x, demo.x)


class TestFit:
    def test_too_few_samples(self):
        with pytest.raises(FitError):
            learn_from_demo(minimum_jerk(START, GOAL, 1.0, 30), n_basis=20)

    def test_too_few_basis_functions(self, demo):
        with pytest.raises(FitError):
            learn_from_demo(demo, n_basis=4)

    def test_widths_from_center_spacing(self):
        c, h = basis_centers(20)
        assert h[0] == pytest.approx(1.0 / (2.0 * (c[1] - c[0]) ** 2))

    def test_skill_defaults(self, skill):
        assert (skill.K, skill.D) == (100.0, 20.0)
        assert skill.D == pytest.approx(2 * math.sqrt(skill.K))
        assert np.array_equal(skill.x0, START) and np.array_equal(skill.g, GOAL)

    def test_skill_text_round_trip(self, skill):
        back = skill_from_text(skill_to_text(skill))
        a, b = rollout(skill), rollout(back)
        assert np.array_equal(a.x, b.x)

    def test_constant_velocity_line(self):
        t = np.linspace(0, 1.5, 40)
        line = Trajectory(t, np.column_stack([0.1 + 0.2 * t, 0.1 + 0.1 * t]))
        tr = rollout(learn_from_demo(line))
        assert np.max(np.abs(tr.x[-1] - line.x[-1])) < 1e-3

    def test_closed_loop_demo(self):
        t = np.linspace(0, 2.0, 40)
        x = np.column_stack([0.3 + 0.05 * np.sin(np.pi * t), 0.2 + 0.04 * np.sin(2 * np.pi * t / 2.0)])
        x[-1] = x[0]
        loop = Trajectory(t, x)
        tr = rollout(learn_from_demo(loop))
        lo, hi = loop.x.min(axis=0), loop.x.max(axis=0)
        margin = 0.1 * (hi - lo)
        assert np.all(tr.x >= lo - margin) and np.all(tr.x <= hi + margin)


class TestRollout:
    def test_fixed_point(self):
        c, h = basis_centers(10)
        sk = DmpSkill(np.zeros((2, 10)), c, h, x0=GOAL.copy(), g=GOAL.copy())
        tr = rollout(sk)
        assert np.all(tr.x == GOAL)

    def test_non_finite(self, skill):
        with pytest.raises(NumericError):
            rollout(skill, g=[np.nan, 0.0])

    def test_coarse_dt(self, skill):
        with pytest.raises(NumericError):
            rollout(skill, tau=1.0, dt=0.05)

    def test_time_scaling_keeps_path(self, skill):
        a = rollout(skill, tau=2.0, settle_tol=None)
        b = rollout(skill, tau=4.0, settle_tol=None)
        assert b.duration == pytest.approx(2 * a.duration)
        assert np.max(np.abs(a.x - b.x)) < 1e-6

    @settings(max_examples=25, deadline=None)
    @given(st.tuples(st.floats(0.05, 0.55), st.floats(0.05, 0.55)),
           st.tuples(st.floats(0.05, 0.55), st.floats(0.05, 0.55)),
           st.floats(0.5, 3.0))
    def test_goal_convergence(self, x0, g, duration):
        sk = learn_from_demo(minimum_jerk(x0, g, duration, 40))
        tr = rollout(sk, g=np.asarray(g) + 0.03)
        assert np.max(np.abs(tr.x[-1] - (np.asarray(g) + 0.03))) < 1e-3
