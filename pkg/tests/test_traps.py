import math

import numpy as np
import pytest

from dgfftrap.errors import InvalidParameterError
from dgfftrap.field import ALPHA, centering_m, sample_field
from dgfftrap.lattice import ball_offsets
from dgfftrap.traps import (deep_traps, gibbs_measure, is_separated,
                            local_maxima, mass_outside, restrict_landscape,
                            trap_ball_mask, trap_depth, trap_log_depth)


def _brute_local_maxima(fld, r):
    # independent oracle: direct scan of every vertex against its r-ball,
    # breaking float ties by lexicographic position
    n = fld.n
    out = []
    offs = [(dx, dy) for dx, dy in ball_offsets(r) if (dx, dy) != (0, 0)]
    for x in range(n):
        for y in range(n):
            hx = (fld.values[x, y], x, y)
            if all(hx > (fld.values[(x + dx) % n, (y + dy) % n],
                         (x + dx) % n, (y + dy) % n) for dx, dy in offs):
                out.append((x, y))
    return out


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
def test_local_maxima_against_brute_force(r):
    fld = sample_field(12, 31)
    assert sorted(local_maxima(fld, r)) == sorted(_brute_local_maxima(fld, r))


def test_local_maxima_with_ties():
    from dgfftrap.field import FieldSample
    fld = FieldSample(n=6, values=np.zeros((6, 6)), seed=0, method="test")
    got = local_maxima(fld, 2.0)
    assert sorted(got) == sorted(_brute_local_maxima(fld, 2.0))


def test_trap_depth_direct_sum():
    fld = sample_field(10, 4)
    beta = 1.3
    for x in ((0, 0), (3, 7), (9, 9)):
        direct = sum(math.exp(beta * fld.values[(x[0] + dx) % 10,
                                                (x[1] + dy) % 10])
                     for dx, dy in ball_offsets(2.0))
        assert trap_depth(fld, x, 2.0, beta) == pytest.approx(direct,
                                                              rel=1e-12)
        assert trap_log_depth(fld, x, 2.0, beta) == pytest.approx(
            math.log(direct), abs=1e-12)


def test_trap_depth_overflow_goes_to_log_scale():
    from dgfftrap.field import FieldSample
    vals = np.full((5, 5), 300.0)
    fld = FieldSample(n=5, values=vals, seed=0, method="test")
    assert trap_depth(fld, (2, 2), 2.0, 5.0) == math.inf
    assert trap_log_depth(fld, (2, 2), 2.0, 5.0) == pytest.approx(
        5.0 * 300.0 + math.log(9), abs=1e-9)
    ls = deep_traps(fld, 2.0, 1, 5.0)
    assert ls.log_scale
    assert ls.traps[0].depth == math.inf
    assert math.isfinite(ls.traps[0].log_depth)


def test_deep_traps_ordering_and_atoms():
    fld = sample_field(16, 9)
    beta = 2 * ALPHA
    ls = deep_traps(fld, 2.0, 5, beta)
    lds = [t.log_depth for t in ls.traps]
    assert lds == sorted(lds, reverse=True)
    assert [t.rank for t in ls.traps] == [1, 2, 3, 4, 5]
    # every trap is an r-local maximum and deeper than all other maxima
    maxima = set(local_maxima(fld, 2.0))
    kept = {t.position for t in ls.traps}
    assert kept <= maxima
    rest = [trap_log_depth(fld, p, 2.0, beta) for p in maxima - kept]
    assert not rest or max(rest) <= min(lds) + 1e-12
    m_n = centering_m(16)
    for t, ((ux, uy), depth) in zip(ls.traps, ls.rescaled_atoms):
        assert (ux, uy) == (t.position[0] / 16, t.position[1] / 16)
        assert depth == pytest.approx(math.exp(t.log_depth - beta * m_n),
                                      rel=1e-12)


def test_deep_traps_shortfall():
    fld = sample_field(8, 2)
    ls = deep_traps(fld, 8.0, 10, 1.0)
    assert ls.shortfall
    assert len(ls.traps) < 10


def test_restrict_landscape():
    fld = sample_field(16, 9)
    full = deep_traps(fld, 2.0, 5, 2 * ALPHA)
    sub = restrict_landscape(full, 2)
    assert [t.position for t in sub.traps] == \
        [t.position for t in full.traps[:2]]
    assert len(sub.rescaled_atoms) == 2
    with pytest.raises(InvalidParameterError):
        restrict_landscape(full, 0)
    with pytest.raises(InvalidParameterError):
        restrict_landscape(full, 6)


def test_is_separated_hand_cases():
    from dgfftrap.traps import Trap, TrapLandscape

    def mk(positions, n):
        traps = [Trap(position=p, depth=1.0, log_depth=0.0, rank=i + 1)
                 for i, p in enumerate(positions)]
        return TrapLandscape(n=n, r=2.0, m=len(traps), beta=1.0, traps=traps,
                             separated=False, shortfall=False, log_scale=False)

    n = 64  # r_N ~ 15.39
    assert is_separated(mk([(31, 31)], n), n)
    assert not is_separated(mk([(5, 31)], n), n)          # near the boundary
    assert is_separated(mk([(20, 20), (40, 40)], n), n)   # dist ~ 28.3
    assert not is_separated(mk([(20, 20), (30, 30)], n), n)  # dist ~ 14.1
    # wraparound distance counts: 20 -> 44 is 24 apart directly
    assert is_separated(mk([(20, 31), (44, 31)], n), n)


def test_gibbs_measure_normalization():
    fld = sample_field(8, 13)
    mu = gibbs_measure(fld, 3.0)
    assert mu.normalized.sum() == pytest.approx(1.0, abs=1e-12)
    direct = np.exp(3.0 * fld.values)
    assert mu.total == pytest.approx(direct.sum(), rel=1e-12)
    assert np.allclose(mu.normalized, direct / direct.sum(), rtol=1e-10)


def test_trap_ball_mask_counts():
    fld = sample_field(32, 17)
    ls = deep_traps(fld, 2.0, 3, 2 * ALPHA)
    mask = trap_ball_mask(ls)
    # at most 9 vertices per trap; fewer only on overlap
    assert mask.sum() <= 3 * 9
    for t in ls.traps:
        assert mask[t.position[0], t.position[1]]


def test_mass_outside_monotone_in_m():
    fld = sample_field(32, 21)
    beta = 2 * ALPHA
    full = deep_traps(fld, 2.0, 8, beta)
    vals = [mass_outside(fld, restrict_landscape(full, m))
            for m in (1, 2, 4, 8)]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    assert all(v >= 0 for v in vals)


def test_mass_outside_direct_small_case():
    fld = sample_field(8, 3)
    beta = 1.0
    ls = deep_traps(fld, 2.0, 1, beta)
    mask = trap_ball_mask(ls)
    m_n = centering_m(8)
    direct = np.exp(beta * (fld.values[~mask] - m_n)).sum()
    assert mass_outside(fld, ls) == pytest.approx(direct, rel=1e-12)
