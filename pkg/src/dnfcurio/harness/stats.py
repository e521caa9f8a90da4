"""Rank statistics used to compare experimental conditions.

Small samples get exact permutation p-values (ties handled by enumerating the
pooled mid-ranks); larger ones fall back to the usual normal and chi-squared
approximations with tie correction.
"""
from __future__ import annotations

import itertools
import math
import numbers
from collections import Counter
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as _sp

from ..errors import UndefinedRatioError

EXACT_MAX_N = 8          # per sample for Mann-Whitney, in total for Kruskal-Wallis
_REL = 1e-9              # tolerance when comparing permuted statistics to the observed one


def rankdata(values: Sequence[float]) -> np.ndarray:
    """Mid-ranks, 1-based."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    xs = x[order]
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_term(values: Iterable[float]) -> float:
    return float(sum(t ** 3 - t for t in Counter(values).values()))


def _u_from_ranks(ranks_a: np.ndarray, n1: int) -> float:
    return float(ranks_a.sum() - n1 * (n1 + 1) / 2.0)


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided Mann-Whitney test; returns ``(U_a, p)``.

    ``U_a`` counts pairs with ``a > b`` (ties count one half).
    """
    a = list(map(float, a))
    b = list(map(float, b))
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    ranks = rankdata(a + b)
    u = _u_from_ranks(ranks[:n1], n1)
    mean = n1 * n2 / 2.0
    if n1 <= EXACT_MAX_N and n2 <= EXACT_MAX_N:
        return u, _mw_exact_p(ranks, n1, abs(u - mean))
    n = n1 + n2
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(a + b) / (n * (n - 1)))
    if var <= 0.0:
        return u, 1.0
    z = (abs(u - mean) - 0.5) / math.sqrt(var)     # continuity correction
    return u, float(min(1.0, 2.0 * _sp.norm.sf(max(z, 0.0))))


def _mw_exact_p(ranks: np.ndarray, n1: int, dev: float) -> float:
    n = len(ranks)
    mean = n1 * (n - n1) / 2.0
    hits = total = 0
    for idx in itertools.combinations(range(n), n1):
        u = float(ranks[list(idx)].sum()) - n1 * (n1 + 1) / 2.0
        total += 1
        if abs(u - mean) >= dev - _REL * max(1.0, dev):
            hits += 1
    return hits / total


def _kw_h(ranks: np.ndarray, sizes: Sequence[int], tie: float) -> float:
    n = len(ranks)
    h, start = 0.0, 0
    for m in sizes:
        r = ranks[start:start + m]
        h += r.sum() ** 2 / m
        start += m
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    corr = 1.0 - tie / (n ** 3 - n)
    return h / corr if corr > 0 else 0.0


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Kruskal-Wallis H with tie correction; returns ``(H, p)``.

    The p-value is exact (all distinct assignments of the pooled ranks to
    groups of the observed sizes) for up to eight observations in total,
    chi-squared with ``k - 1`` degrees of freedom beyond.
    """
    groups = [list(map(float, g)) for g in groups]
    if len(groups) < 2 or any(len(g) == 0 for g in groups):
        raise ValueError("need at least two non-empty groups")
    pooled = [x for g in groups for x in g]
    sizes = [len(g) for g in groups]
    n = len(pooled)
    tie = _tie_term(pooled)
    if tie == n ** 3 - n:           # every value equal
        return 0.0, 1.0
    ranks = rankdata(pooled)
    h = float(_kw_h(ranks, sizes, tie))
    if n <= EXACT_MAX_N:
        return h, _kw_exact_p(ranks, sizes, tie, h)
    return h, float(_sp.chi2.sf(h, len(groups) - 1))


def _split(pool: tuple, sizes: list):
    """Every way to split ``pool`` into ordered groups of the given sizes."""
    if len(sizes) == 1:
        yield [pool]
        return
    for first in itertools.combinations(pool, sizes[0]):
        rest = tuple(i for i in pool if i not in first)
        for tail in _split(rest, sizes[1:]):
            yield [first, *tail]


def _kw_exact_p(ranks: np.ndarray, sizes: Sequence[int], tie: float, h_obs: float) -> float:
    hits = total = 0
    for parts in _split(tuple(range(len(ranks))), list(sizes)):
        r = np.concatenate([ranks[list(p)] for p in parts])
        total += 1
        if _kw_h(r, sizes, tie) >= h_obs - _REL * max(1.0, h_obs):
            hits += 1
    return hits / total


def goals_discovered(log) -> float:
    """Goal count of a run log, or the value itself when given a number."""
    if isinstance(log, numbers.Real):
        return float(log)
    return float(log.goals_discovered)


def habituation_ratio(slow_logs, fast_logs) -> float:
    """Mean goals discovered under slow habituation over the mean under fast habituation."""
    slow = [goals_discovered(x) for x in slow_logs]
    fast = [goals_discovered(x) for x in fast_logs]
    if not slow or not fast:
        raise ValueError("both groups of runs must be non-empty")
    f_avg = float(np.mean(fast))
    if f_avg == 0.0:
        raise UndefinedRatioError("fast habituation discovered no goals; ratio undefined")
    return float(np.mean(slow)) / f_avg
