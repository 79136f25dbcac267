import math

import numpy as np
import pytest

from dgfftrap.errors import InvalidParameterError, ResourceLimitError
from dgfftrap.field import (ALPHA, centering_m, sample_field, sample_fields,
                            scales, separation_radius, spectral_green,
                            superlevel_set, time_scale_s)
from dgfftrap.lattice import G_CONST, green_box


def test_alpha_value():
    assert ALPHA == pytest.approx(2.5066282746310002, abs=1e-15)


def test_centering_values():
    # oracle: 2 sqrt(g) log N - (3/4) sqrt(g) log log N evaluated directly
    assert centering_m(3) == pytest.approx(1.6968520846488608, abs=1e-12)
    assert centering_m(16) == pytest.approx(3.814160569763464, abs=1e-12)
    assert centering_m(1024) == pytest.approx(9.9024571034304, abs=1e-10)
    with pytest.raises(InvalidParameterError):
        centering_m(2)


def test_time_scale_identity():
    # s_N = g N^{2 sqrt(g) beta} (log N)^{1 - 3 sqrt(g) beta / 4}
    # must agree with the overflow-safe g e^{beta m_N} log N form
    for n, beta in ((8, 1.0), (16, 2.5), (64, 2 * ALPHA)):
        sg = math.sqrt(G_CONST)
        direct = (G_CONST * n ** (2 * sg * beta)
                  * math.log(n) ** (1 - 3 * sg * beta / 4))
        assert time_scale_s(n, beta) == pytest.approx(direct, rel=1e-12)


def test_separation_radius():
    assert separation_radius(1024) == pytest.approx(1024 / math.log(1024))
    sc = scales(128, 2 * ALPHA)
    assert sc.r_n == separation_radius(128)
    assert sc.m_n == centering_m(128)
    assert sc.theta(2) == 2 * math.ceil(128 * 128 * math.log(128))


def test_sampler_determinism_and_independence_of_count():
    a = sample_field(16, 7)
    b = sample_field(16, 7)
    assert np.array_equal(a.values, b.values)
    c = sample_field(16, 8)
    assert not np.array_equal(a.values, c.values)
    many = sample_fields(16, 3, 4)
    assert len(many) == 4
    assert not np.array_equal(many[0].values, many[1].values)


def test_spectral_green_matches_solver():
    # the sine-basis diagonalization and the sparse solver must agree to
    # rounding; this pins the eigenvalue and normalization conventions
    for n in (3, 6):
        assert np.max(np.abs(spectral_green(n) - green_box(n).values)) < 1e-12


@pytest.mark.parametrize("method", ["dst", "cholesky"])
def test_empirical_covariance_matches_green(method):
    n, reps = 6, 40_000
    flds = sample_fields(n, 11, reps, method=method)
    h = np.array([f.values.reshape(-1) for f in flds])
    emp = h.T @ h / reps
    g = green_box(n).values
    # per-entry MC error: SE of h_i h_j is sqrt((G_ii G_jj + G_ij^2)/reps)
    se = np.sqrt((np.outer(np.diag(g), np.diag(g)) + g ** 2) / reps)
    assert np.max(np.abs(emp - g) / se) < 5.0


def test_zero_mean():
    flds = sample_fields(8, 23, 20_000)
    h = np.array([f.values for f in flds])
    se = np.std(h, axis=0) / math.sqrt(len(h))
    assert np.max(np.abs(h.mean(axis=0)) / se) < 5.0


def test_cholesky_guard():
    with pytest.raises(ResourceLimitError):
        sample_field(400, 0, method="cholesky")


def test_bad_parameters():
    with pytest.raises(InvalidParameterError):
        sample_field(1, 0)
    with pytest.raises(InvalidParameterError):
        sample_fields(8, 0, 0)
    with pytest.raises(InvalidParameterError):
        sample_field(8, 0, method="qr")


def test_superlevel_set():
    fld = sample_field(8, 5)
    m = centering_m(8)
    pts = superlevel_set(fld, 0.0, math.inf)
    expected = {(x, y) for x in range(8) for y in range(8)
                if fld.values[x, y] - m >= 0.0}
    assert set(pts) == expected
    lo = superlevel_set(fld, -math.inf, 0.0, closed_lo=False)
    assert len(lo) + len(pts) == 64
