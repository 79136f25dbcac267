import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgfftrap.errors import InvalidParameterError
from dgfftrap.metrics import (chi_square_uniform, dstar, ks_test, l_metric,
                              permutation_independence_test,
                              rescale_walk_path, unscale_walk_path)
from dgfftrap.walk import PathSample

INF = math.inf


def _path(times, states, horizon):
    return PathSample("unit-square", np.array(times, dtype=float),
                      np.array(states, dtype=float), horizon)


def test_dstar_cases():
    assert dstar((0.0, 0.0), (1.0, 0.0)) == 1.0
    assert dstar((0.25, 0.25), (0.25, 0.25)) == 0.0
    assert dstar((0.0, 0.0), (INF, INF)) == 1.0
    assert dstar((INF, INF), (0.3, 0.3)) == 1.0
    assert dstar((INF, INF), (INF, INF)) == 0.0
    assert dstar((0.0, 0.0), (0.3, 0.4)) == pytest.approx(0.5)


def test_l_metric_hand_examples():
    f = _path([0.0, 0.5], [[0.0, 0.0], [INF, INF]], 1.0)
    g = _path([0.0], [[1.0, 0.0]], 1.0)
    # distance 1 on [0, .5), 1 (finite vs infinity) on [.5, 1)
    assert l_metric(f, g, 1.0) == pytest.approx(1.0)
    g0 = _path([0.0], [[0.0, 0.0]], 1.0)
    assert l_metric(f, g0, 1.0) == pytest.approx(0.5)
    assert l_metric(f, f, 1.0) == 0.0
    # jump inside the window of the other path
    a = _path([0.0, 0.25, 0.75], [[0, 0], [0, 1], [1, 1]], 1.0)
    b = _path([0.0, 0.5], [[0, 0], [0, 1]], 1.0)
    expected = 0.25 * 0 + 0.25 * 1 + 0.25 * 0 + 0.25 * 1
    assert l_metric(a, b, 1.0) == pytest.approx(expected)


def test_l_metric_requires_coverage():
    f = _path([0.0], [[0, 0]], 0.5)
    g = _path([0.0], [[0, 0]], 1.0)
    with pytest.raises(InvalidParameterError):
        l_metric(f, g, 1.0)
    with pytest.raises(InvalidParameterError):
        l_metric(g, g, 0.0)


@st.composite
def _paths(draw, horizon=1.0):
    k = draw(st.integers(1, 6))
    times = sorted(draw(st.lists(
        st.floats(0.001, horizon - 0.001), min_size=k - 1, max_size=k - 1,
        unique=True)))
    states = [[draw(st.floats(0, 1)), draw(st.floats(0, 1))]
              for _ in range(k)]
    return _path([0.0] + times, states, horizon)


@settings(max_examples=50, deadline=None)
@given(_paths(), _paths(), _paths())
def test_l_metric_is_a_pseudometric(f, g, h):
    dfg = l_metric(f, g, 1.0)
    assert dfg == pytest.approx(l_metric(g, f, 1.0))
    assert l_metric(f, f, 1.0) == 0.0
    assert dfg <= l_metric(f, h, 1.0) + l_metric(h, g, 1.0) + 1e-9
    assert 0 <= dfg <= math.sqrt(2) + 1e-12


def test_rescale_roundtrip_and_coalescing():
    p = PathSample("torus", np.array([0.0, 2.0, 5.0]),
                   np.array([[3.0, 4.0], [1.0, 2.0], [0.0, 0.0]]), 8.0)
    r = rescale_walk_path(p, 4.0, 8)
    assert r.state_space == "unit-square"
    assert np.allclose(r.times, [0.0, 0.5, 1.25])
    assert np.allclose(r.states, p.states / 8)
    back = unscale_walk_path(r, 4.0, 8)
    assert np.array_equal(back.times, p.times)
    assert np.array_equal(back.states, p.states)
    # distinct times can collapse after division; the dedup must keep the
    # last state at the coalesced jump time
    s_n = 1.1e16
    t1 = None
    for k in range(1, 2000):
        cand = np.float64(3e15 + 2 * k)
        if cand / s_n == np.nextafter(cand, np.inf) / s_n:
            t1 = float(cand)
            break
    assert t1 is not None
    big = PathSample("torus", np.array([0.0, t1, np.nextafter(t1, np.inf)]),
                     np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), 1e17)
    rs = rescale_walk_path(big, s_n, 8)
    assert np.all(np.diff(rs.times) > 0)
    assert len(rs.times) == 2
    assert rs.states[-1].tolist() == [0.25, 0.25]
    with pytest.raises(InvalidParameterError):
        rescale_walk_path(r, 4.0, 8)  # not a torus path


def test_ks_test():
    rng = np.random.default_rng(1)
    from scipy import stats
    _, p = ks_test(rng.exponential(2.0, 2000), stats.expon(scale=2.0).cdf)
    assert p > 0.01
    _, p_bad = ks_test(rng.exponential(1.0, 2000), stats.expon(scale=2.0).cdf)
    assert p_bad < 1e-6
    with pytest.raises(InvalidParameterError):
        ks_test([1.0, 2.0], stats.expon().cdf)


def test_chi_square_uniform():
    _, p = chi_square_uniform([100, 95, 105, 100])
    assert p > 0.5
    _, p_bad = chi_square_uniform([200, 50, 75, 75])
    assert p_bad < 1e-6
    with pytest.raises(InvalidParameterError):
        chi_square_uniform([1, 2, 1])


def test_permutation_independence():
    rng = np.random.default_rng(5)
    x = rng.normal(size=80)
    tau, p = permutation_independence_test(x, rng.normal(size=80),
                                           n_permutations=500, seed=2)
    assert p > 0.01
    tau2, p2 = permutation_independence_test(x, 2 * x + 0.01,
                                             n_permutations=500, seed=2)
    assert p2 < 0.01
    assert tau2 == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        permutation_independence_test([1.0], [2.0])
