import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnfcurio import kernels
from dnfcurio.errors import ConfigError, IntegrationStabilityError
from dnfcurio.fields import (FieldGrid, InteractionKernel, MemoryTrace, Projection, SlowBoost,
                             lateral_interaction, step_field, step_memory_trace, step_slow_boost,
                             transfer)


def truncated(kern, *offsets):
    """Kernel value with each Gaussian cut at ``cutoff`` standard deviations, per axis."""
    total = 0.0
    for c, sig in ((kern.c_exc, kern.sigma_exc), (-kern.c_inh, kern.sigma_inh)):
        sig = np.broadcast_to(sig, (len(offsets),))
        term = c
        for d, s in zip(offsets, sig):
            term = term * np.exp(-0.5 * (d / s) ** 2) * (np.abs(d) <= math.ceil(kern.cutoff * s))
        total = total + term
    return total


def naive_conv(f, kern):
    """O(n^2) direct summation with zero outside the grid."""
    n = len(f)
    out = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if f[j]:
                out[i] += truncated(kern, i - j) * f[j]
    return out


class TestTransfer:
    def test_relu_subthreshold(self):
        assert transfer(-2.0, "relu") == 0.0

    @pytest.mark.parametrize("beta", [0.5, 4.0, 100.0])
    def test_sigmoid_threshold_point(self, beta):
        assert transfer(0.0, "sigmoid", beta) == 0.5

    def test_absolute_sigmoid(self):
        assert transfer(1.0, "absolute_sigmoid", 100.0) == pytest.approx(0.5 * (1 + 100 / 101), abs=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            transfer(0.0, "tanh")

    def test_grid_shape_kept(self):
        assert transfer(np.zeros((3, 4))).shape == (3, 4)

    def test_sigmoid_saturates_without_overflow(self):
        out = transfer(np.array([-1e6, 1e6]), "sigmoid", 100.0)
        assert out[0] == 0.0 and out[1] == 1.0


class TestKernel:
    def test_mexican_hat_center(self):
        k = InteractionKernel(c_exc=3.5, sigma_exc=2.0, c_inh=4.0, sigma_inh=9.0)
        assert k.evaluate(0, 0) == pytest.approx(-0.5)

    def test_negative_inhibition_magnitude_rejected(self):
        with pytest.raises(ConfigError):
            InteractionKernel(c_inh=-4.0)

    def test_positive_global_rejected(self):
        with pytest.raises(ConfigError):
            InteractionKernel(g_global=0.1)

    def test_zero_output_gives_zero_interaction(self):
        f = FieldGrid(dims=1, kernel=InteractionKernel(c_exc=1.0, sigma_exc=2.0))
        assert not lateral_interaction(f, np.zeros(100)).any()

    def test_impulse_matches_direct_sum(self, backend):
        k = InteractionKernel(c_exc=1.3, sigma_exc=2.5)
        f = np.zeros(100)
        f[37] = 1.0
        np.testing.assert_allclose(k.convolve(f), naive_conv(f, k), atol=1e-12)

    def test_dog_near_edges_matches_direct_sum(self, backend, rng):
        k = InteractionKernel(c_exc=2.0, sigma_exc=1.5, c_inh=0.7, sigma_inh=6.0)
        f = np.zeros(100)
        f[[0, 3, 50, 97, 99]] = rng.random(5)
        np.testing.assert_allclose(k.convolve(f), naive_conv(f, k), atol=1e-12)

    def test_2d_separable(self, backend, rng):
        k = InteractionKernel(c_exc=1.0, sigma_exc=(2.0, 3.0), c_inh=0.5, sigma_inh=(5.0, 4.0))
        f = np.zeros((100, 100))
        f[10, 90] = 1.0
        out = k.convolve(f)
        i, j = np.meshgrid(np.arange(100), np.arange(100), indexing="ij")
        np.testing.assert_allclose(out, truncated(k, i - 10, j - 90), atol=1e-12)

    def test_global_term(self):
        k = InteractionKernel(c_exc=0.0, g_global=-0.5)
        fld = FieldGrid(dims=1, kernel=k)
        out = np.zeros(100)
        out[[5, 6]] = 1.0
        np.testing.assert_allclose(lateral_interaction(fld, out), np.full(100, -1.0))


class TestStepField:
    def test_dt_not_below_tau(self):
        with pytest.raises(IntegrationStabilityError):
            step_field(FieldGrid(tau=10.0), 0.0, 10.0)

    def test_input_shape_checked(self):
        with pytest.raises(ConfigError):
            step_field(FieldGrid(dims=1), np.zeros(5), 10.0)

    def test_noise_needs_generator(self):
        with pytest.raises(ConfigError):
            step_field(FieldGrid(dims=1, noise_amp=0.05), 0.0, 10.0)

    def test_seeded_noise_is_deterministic(self):
        runs = []
        for _ in range(2):
            f = FieldGrid(dims=1, noise_amp=0.05, rng=np.random.default_rng(3))
            for _ in range(20):
                step_field(f, 0.0, 10.0)
            runs.append(f.u.copy())
        assert np.array_equal(*runs)

    def test_node_relaxes_to_input_plus_rest(self):
        f = FieldGrid(h=-1.0, tau=20.0)
        for _ in range(500):
            step_field(f, 3.0, 10.0)
        assert float(f.u) == pytest.approx(2.0, abs=1e-9)


class TestMemoryTrace:
    def test_closed_gate_holds(self, rng):
        tr = MemoryTrace(shape=(10,), tau_plus=100, tau_minus=100)
        tr.v[:] = rng.random(10)
        before = tr.v.copy()
        step_memory_trace(tr, rng.random(10), 0.0, 10.0)
        assert np.array_equal(tr.v, before)

    def test_dt_checked(self):
        with pytest.raises(IntegrationStabilityError):
            step_memory_trace(MemoryTrace(tau_plus=5.0), 1.0, 1.0, 10.0)

    def test_bad_time_constant(self):
        with pytest.raises(ConfigError):
            MemoryTrace(tau_plus=0.0)

    def test_graded_settles_on_level(self):
        tr = MemoryTrace(shape=(3,), tau_plus=30, tau_minus=30, graded=True)
        for _ in range(200):
            step_memory_trace(tr, np.array([0.2, 0.6, 0.0]), 1.0, 10.0)
        np.testing.assert_allclose(tr.v, [0.2, 0.6, 0.0], atol=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=80),
           st.floats(20, 5000), st.floats(20, 5000), st.booleans())
    def test_bounded(self, seq, tp, tm, graded):
        tr = MemoryTrace(shape=(1,), tau_plus=tp, tau_minus=tm, graded=graded)
        for f, a in seq:
            step_memory_trace(tr, np.array([f]), a, 10.0)
            assert 0.0 <= tr.v[0] <= 1.0


class TestSlowBoost:
    def test_hold(self):
        b = SlowBoost(v=0.37)
        step_slow_boost(b, 0.0, 0.0, 10.0)
        assert b.v == 0.37

    def test_decay_under_threshold(self):
        b = SlowBoost(tau_minus=300, v=0.8)
        for _ in range(30):
            step_slow_boost(b, 0.0, 1.0, 10.0)
        assert b.v == pytest.approx(0.8 * math.exp(-300 / 300), rel=1e-12)


class TestProjection:
    def test_contract_and_expand(self):
        x = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(Projection("a", "b", axis=1)._map(x, (2,)), [2.0, 5.0])
        assert np.array_equal(Projection("a", "b", op="sum", axis=0)._map(x, (3,)), [3.0, 5.0, 7.0])
        assert Projection("a", "b", op="sum")._map(x, ()) == 15.0
        assert Projection("a", "b", axis=1).apply(np.array([1.0, 2.0]), (3, 2)).tolist() == [[1, 2]] * 3

    def test_gate_mask_gain(self):
        p = Projection("a", "b", gain=2.0)
        out = p.apply(np.ones(4), (4,), mask=np.array([1, 0, 1, 0.5]), gate=0.5)
        assert out.tolist() == [1.0, 0.0, 1.0, 0.5]

    def test_mass_normalized_blob_projects_kernel(self):
        k = InteractionKernel(c_exc=1.0, sigma_exc=5.0)
        p = Projection("a", "b", kernel=k, normalize="mass")
        src = np.zeros(100)
        src[40] = 7.0
        assert p.apply(src, (100,))[40] == pytest.approx(1.0)

    def test_bad_mapping(self):
        with pytest.raises(ConfigError):
            Projection("a", "b")._map(np.zeros((2, 2)), (2, 2, 2))

    def test_bad_op(self):
        with pytest.raises(ConfigError):
            Projection("a", "b", op="mean")


def test_backends_agree_on_a_field_run(rng):
    if not kernels.compiled_available():
        pytest.skip("compiled core not built")
    k = InteractionKernel(c_exc=1.0, sigma_exc=3.0, c_inh=0.5, sigma_inh=8.0, g_global=-0.05)
    stim = 4.0 * np.exp(-0.5 * ((np.arange(100) - 30) / 3.0) ** 2)
    runs = {}
    for name in ("python", "compiled"):
        kernels.use_backend(name)
        f = FieldGrid(dims=1, h=-2.0, tau=50.0, kernel=k, noise_amp=0.05, rng=np.random.default_rng(1))
        for _ in range(200):
            step_field(f, stim, 10.0)
        runs[name] = f.u.copy()
    kernels.use_backend("compiled")
    np.testing.assert_allclose(runs["python"], runs["compiled"], atol=1e-10)
    assert math.isfinite(runs["python"].sum())
