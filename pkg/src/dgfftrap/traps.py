"""Trapping-landscape extraction: r-local maxima, trap depths, deep-trap
ordering, separation, Gibbs measures and the mass-outside statistic.

All field aggregations of e^{beta h} run through log-sum-exp so that large
beta never overflows; depths are reported as plain floats whenever they are
representable and flagged as log-scale otherwise.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameterError
from .field import centering_m, separation_radius
from .lattice import ball_offsets, torus_distance

LOG_OVERFLOW = 700.0  # exp() overflows just above 709


@dataclass
class Trap:
    position: tuple
    depth: float       # inf when only the log-scale value is representable
    log_depth: float
    rank: int


@dataclass
class TrapLandscape:
    n: int
    r: float
    m: int
    beta: float
    traps: list
    separated: bool
    shortfall: bool
    log_scale: bool
    rescaled_atoms: list = dc_field(default_factory=list)


def local_maxima(fld, r):
    """All x with h_x = max over the open r-ball (torus indexing) of h.

    Float ties are broken lexicographically by (x, y) so the result is a
    deterministic function of the field.
    """
    if r < 1:
        raise InvalidParameterError("r must be >= 1")
    h = fld.values
    n = fld.n
    # total order: field value first, then (x, y) lexicographic
    order = np.lexsort((
        np.tile(np.arange(n), n),        # y
        np.repeat(np.arange(n), n),      # x
        h.reshape(-1),                   # h (primary)
    ))
    rank = np.empty(n * n, dtype=np.int64)
    rank[order] = np.arange(n * n)
    rank = rank.reshape(n, n)
    best = rank.copy()
    for dx, dy in ball_offsets(r):
        if dx == 0 and dy == 0:
            continue
        np.maximum(best, np.roll(rank, (-dx, -dy), axis=(0, 1)), out=best)
    xs, ys = np.nonzero(rank == best)
    return list(zip(xs.tolist(), ys.tolist()))


def _log_depth_at(fld, x, r, beta):
    vals = [beta * fld.values[(x[0] + dx) % fld.n, (x[1] + dy) % fld.n]
            for dx, dy in ball_offsets(r)]
    return float(logsumexp(vals))


def trap_depth(fld, x, r, beta):
    """Depth tau_r(x) = sum over the open r-ball of e^{beta h} (torus).

    Returns inf if the value overflows a double; use trap_log_depth then.
    """
    ld = _log_depth_at(fld, x, r, beta)
    return math.exp(ld) if ld <= LOG_OVERFLOW else math.inf


def trap_log_depth(fld, x, r, beta):
    """log tau_r(x), always representable."""
    return _log_depth_at(fld, x, r, beta)


def deep_traps(fld, r, m, beta):
    """The M deepest r-local maxima, with separation flag and rescaled atoms."""
    if m < 1:
        raise InvalidParameterError("M must be >= 1")
    cand = local_maxima(fld, r)
    offs = np.array(ball_offsets(r))
    n = fld.n
    pos = np.array(cand)
    # log-depths for every candidate, vectorized over the ball stencil
    vals = beta * fld.values[(pos[:, 0, None] + offs[None, :, 0]) % n,
                             (pos[:, 1, None] + offs[None, :, 1]) % n]
    logd = logsumexp(vals, axis=1)
    # descending depth, ties broken lexicographically by position
    order = np.lexsort((pos[:, 1], pos[:, 0], -logd))
    keep = order[:m]
    shortfall = len(cand) < m
    log_scale = bool(np.max(logd[keep]) > LOG_OVERFLOW)
    m_n = centering_m(n)
    traps = []
    atoms = []
    for rk, i in enumerate(keep, start=1):
        ld = float(logd[i])
        depth = math.exp(ld) if ld <= LOG_OVERFLOW else math.inf
        p = (int(pos[i, 0]), int(pos[i, 1]))
        traps.append(Trap(position=p, depth=depth, log_depth=ld, rank=rk))
        rd = ld - beta * m_n
        atoms.append(((p[0] / n, p[1] / n),
                      math.exp(rd) if rd <= LOG_OVERFLOW else math.inf))
    landscape = TrapLandscape(n=n, r=float(r), m=m, beta=beta, traps=traps,
                              separated=False, shortfall=shortfall,
                              log_scale=log_scale, rescaled_atoms=atoms)
    landscape.separated = is_separated(landscape, n)
    return landscape


def restrict_landscape(landscape, m):
    """The same landscape keeping only the top m traps (ranks preserved)."""
    if m < 1 or m > len(landscape.traps):
        raise InvalidParameterError("need 1 <= m <= number of traps")
    sub = TrapLandscape(
        n=landscape.n, r=landscape.r, m=m, beta=landscape.beta,
        traps=landscape.traps[:m], separated=False,
        shortfall=landscape.shortfall and m > len(landscape.traps),
        log_scale=landscape.log_scale,
        rescaled_atoms=landscape.rescaled_atoms[:m])
    sub.separated = is_separated(sub, landscape.n)
    return sub


def is_separated(landscape, n):
    """(r, M)-separation: pairwise torus distance >= r_N and box-boundary
    distance >= r_N for every trap."""
    r_n = separation_radius(n)
    pts = [t.position for t in landscape.traps]
    for i in range(len(pts)):
        x, y = pts[i]
        # nearest boundary vertex of Z^2 \ V_N is axis-aligned
        if min(x + 1, y + 1, n - x, n - y) < r_n:
            return False
        for j in range(i + 1, len(pts)):
            if torus_distance(pts[i], pts[j], n) < r_n:
                return False
    return True


@dataclass
class GibbsMeasure:
    n: int
    beta: float
    log_weights: np.ndarray
    log_total: float
    normalized: np.ndarray

    @property
    def weights(self):
        return np.exp(self.log_weights)

    @property
    def total(self):
        return math.exp(self.log_total) if self.log_total <= LOG_OVERFLOW \
            else math.inf


def gibbs_measure(fld, beta):
    """Stationary distribution proportional to e^{beta h}, in log space."""
    logw = beta * fld.values
    logz = float(logsumexp(logw))
    return GibbsMeasure(n=fld.n, beta=beta, log_weights=logw, log_total=logz,
                        normalized=np.exp(logw - logz))


def trap_ball_mask(landscape, n=None, radius=None):
    """Boolean torus mask of the union of open balls around the deep traps."""
    n = n or landscape.n
    radius = radius if radius is not None else landscape.r
    mask = np.zeros((n, n), dtype=bool)
    offs = ball_offsets(radius) if radius >= 1 else []
    for t in landscape.traps:
        x, y = t.position
        for dx, dy in offs:
            mask[(x + dx) % n, (y + dy) % n] = True
    return mask


def mass_outside(fld, landscape):
    """Gibbs mass (centered by m_N) outside the deep-trap balls:
    sum over x not in B_r(Lambda_N(r, M)) of e^{beta (h_x - m_N)}."""
    if landscape.n != fld.n:
        raise InvalidParameterError("landscape/field size mismatch")
    mask = trap_ball_mask(landscape)
    m_n = centering_m(fld.n)
    outside = fld.values[~mask]
    if outside.size == 0:
        return 0.0
    ls = logsumexp(landscape.beta * (outside - m_n))
    return float(np.exp(ls)) if ls <= LOG_OVERFLOW else math.inf
