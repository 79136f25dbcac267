"""Path-space metric, rescaling, and the statistical test primitives."""

import math

import numpy as np
from scipy import stats

from .errors import InvalidParameterError
from .walk import PathSample

INF_STATE = np.array([math.inf, math.inf])


def dstar(a, b):
    """Metric on the unit square plus a point at infinity: Euclidean between
    finite points, 1 to infinity, 0 between two infinities."""
    a_inf = not np.all(np.isfinite(a))
    b_inf = not np.all(np.isfinite(b))
    if a_inf and b_inf:
        return 0.0
    if a_inf or b_inf:
        return 1.0
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _states_at(path, lefts):
    i = np.searchsorted(path.times, lefts, side="right") - 1
    return path.states[np.maximum(i, 0)]


def l_metric(f, g, horizon):
    """Exact integral of dstar(f(s), g(s)) over [0, horizon] for two
    piecewise-constant paths (merged jump partition, no quadrature error)."""
    if horizon <= 0:
        raise InvalidParameterError("horizon must be positive")
    for p in (f, g):
        if p.horizon < horizon or len(p.times) == 0:
            raise InvalidParameterError(
                "both paths must be defined on [0, horizon]")
    cuts = np.unique(np.concatenate([
        f.times[f.times < horizon], g.times[g.times < horizon], [0.0, horizon]]))
    lefts = cuts[:-1]
    widths = np.diff(cuts)
    sf = _states_at(f, lefts)
    sg = _states_at(g, lefts)
    finite_f = np.all(np.isfinite(sf), axis=1)
    finite_g = np.all(np.isfinite(sg), axis=1)
    d = np.ones(len(lefts))
    both = finite_f & finite_g
    d[both] = np.hypot(sf[both, 0] - sg[both, 0], sf[both, 1] - sg[both, 1])
    d[~finite_f & ~finite_g] = 0.0
    return float(np.sum(widths * d))


def rescale_walk_path(path, s_n, n):
    """Map a torus path to the unit square: states / N, times / s_N."""
    if path.state_space != "torus":
        raise InvalidParameterError("expected a torus path")
    if s_n <= 0 or n < 1:
        raise InvalidParameterError("s_N and N must be positive")
    times = path.times / s_n
    # distinct clock times can collapse after division; right continuity
    # keeps the last state at each coalesced jump time
    keep = np.concatenate([np.diff(times) > 0, [True]])
    return PathSample(state_space="unit-square", times=times[keep],
                      states=path.states[keep] / n, horizon=path.horizon / s_n)


def unscale_walk_path(path, s_n, n):
    """Inverse of rescale_walk_path (exact round trip)."""
    return PathSample(state_space="torus", times=path.times * s_n,
                      states=path.states * n, horizon=path.horizon * s_n)


def ks_test(samples, cdf):
    """One-sample Kolmogorov-Smirnov test against a given CDF."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) < 8:
        raise InvalidParameterError("need at least 8 samples")
    res = stats.kstest(samples, cdf)
    return float(res.statistic), float(res.pvalue)


def chi_square_uniform(counts):
    """Pearson chi-square test of the counts against the uniform law."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total < 5 * len(counts):
        raise InvalidParameterError(
            "need at least 5 observations per category on average")
    res = stats.chisquare(counts)
    return float(res.statistic), float(res.pvalue)


def permutation_independence_test(x, y, n_permutations=10_000, seed=0):
    """Permutation test of independence between two samples via Kendall tau.

    Returns (observed tau, p-value of |tau| under random relabelling).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 8:
        raise InvalidParameterError("need paired samples, at least 8")
    obs = stats.kendalltau(x, y).statistic
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_permutations):
        t = stats.kendalltau(x, rng.permutation(y)).statistic
        if abs(t) >= abs(obs) - 1e-15:
            hits += 1
    return float(obs), (hits + 1) / (n_permutations + 1)
