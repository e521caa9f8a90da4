import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from dnfcurio.errors import UndefinedRatioError
from dnfcurio.harness.stats import (goals_discovered, habituation_ratio, kruskal_wallis, mann_whitney_u,
                                    rankdata)


# ---------------------------------------------------------------- oracles
def brute_mw(a, b):
    """U by pair counting; p by enumerating every relabelling of the pooled values."""
    pooled = np.array(a + b, dtype=float)
    n1, n = len(a), len(a) + len(b)

    def u(idx):
        x = pooled[list(idx)]
        y = np.delete(pooled, list(idx))
        return float((x[:, None] > y[None, :]).sum() + 0.5 * (x[:, None] == y[None, :]).sum())

    u_obs = u(range(n1))
    mean = n1 * (n - n1) / 2
    us = [u(c) for c in itertools.combinations(range(n), n1)]
    p = sum(abs(x - mean) >= abs(u_obs - mean) - 1e-9 for x in us) / len(us)
    return u_obs, p


def brute_kw(groups):
    """H from scipy; p by enumerating every permutation of the pooled values."""
    pooled = np.concatenate([np.asarray(g, float) for g in groups])
    sizes = [len(g) for g in groups]
    if np.all(pooled == pooled[0]):
        return 0.0, 1.0
    h_obs = sps.kruskal(*groups).statistic
    ranks = sps.rankdata(pooled)
    n = len(pooled)
    perms = np.array(list(itertools.permutations(range(n))))
    r = ranks[perms]
    bounds = np.cumsum([0] + sizes)
    s = sum(r[:, lo:hi].sum(axis=1) ** 2 / (hi - lo) for lo, hi in zip(bounds[:-1], bounds[1:]))
    ties = sum(c ** 3 - c for c in np.unique(pooled, return_counts=True)[1])
    h = (12.0 / (n * (n + 1)) * s - 3 * (n + 1)) / (1 - ties / (n ** 3 - n))
    return float(h_obs), float(np.mean(h >= h_obs - 1e-9 * max(1.0, h_obs)))


small = st.integers(0, 4)


@st.composite
def two_samples(draw):
    n1 = draw(st.integers(1, 7))
    n2 = draw(st.integers(1, 8 - n1))
    return draw(st.lists(small, min_size=n1, max_size=n1)), draw(st.lists(small, min_size=n2, max_size=n2))


@st.composite
def k_samples(draw):
    k = draw(st.integers(2, 4))
    sizes = [1] * k
    for _ in range(draw(st.integers(0, 8 - k))):
        sizes[draw(st.integers(0, k - 1))] += 1
    return [draw(st.lists(small, min_size=m, max_size=m)) for m in sizes]


# ---------------------------------------------------------------- tests
def test_rankdata_midranks():
    assert rankdata([3, 1, 3, 2]).tolist() == [3.5, 1.0, 3.5, 2.0]


@settings(max_examples=150, deadline=None)
@given(two_samples())
def test_mann_whitney_matches_enumeration(ab):
    a, b = ab
    u, p = mann_whitney_u(a, b)
    u_ref, p_ref = brute_mw(a, b)
    assert u == u_ref
    assert p == pytest.approx(p_ref, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(k_samples())
def test_kruskal_wallis_matches_enumeration(groups):
    h, p = kruskal_wallis(groups)
    h_ref, p_ref = brute_kw(groups)
    assert h == pytest.approx(h_ref, rel=1e-9, abs=1e-12)
    assert p == pytest.approx(p_ref, abs=1e-12)


def test_mann_whitney_known_exact():
    # fully separated 3 vs 3: two of the 20 labellings are as extreme
    assert mann_whitney_u([1, 2, 3], [4, 5, 6]) == (0.0, 0.1)


def test_large_samples_use_scipy_approximation(rng):
    a, b = rng.normal(size=15).tolist(), (rng.normal(size=12) + 1).tolist()
    u, p = mann_whitney_u(a, b)
    ref = sps.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert u == ref.statistic and p == pytest.approx(ref.pvalue, rel=1e-9)
    groups = [rng.normal(size=5).tolist() for _ in range(3)]
    h, p = kruskal_wallis(groups)
    ref = sps.kruskal(*groups)
    assert h == pytest.approx(ref.statistic) and p == pytest.approx(ref.pvalue)


def test_input_validation():
    with pytest.raises(ValueError):
        mann_whitney_u([], [1.0])
    with pytest.raises(ValueError):
        kruskal_wallis([[1.0]])


def test_ratio():
    assert habituation_ratio([3, 5], [2, 2]) == 2.0
    assert goals_discovered(4) == 4.0
    with pytest.raises(UndefinedRatioError):
        habituation_ratio([1, 2], [0, 0])
    with pytest.raises(ValueError):
        habituation_ratio([], [1])
