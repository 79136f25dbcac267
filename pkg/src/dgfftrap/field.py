"""Sampling of the Gaussian free field on the box with zero boundary, plus
the deterministic centering and scale sequences.

Two exact samplers are provided.  The default diagonalizes the killed-walk
operator in the discrete sine basis (DST-I), which is exact in law and runs
in O(N^2 log N) -- this is what makes N = 1024 fields affordable.  The
banded-Cholesky sampler realizes the triangular-factorization construction
directly and serves as a cross-check at moderate N.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import linalg as sla

from .errors import InvalidParameterError, ResourceLimitError
from .lattice import G_CONST, SIZE_GUARD_N, theta_steps

ALPHA = math.sqrt(2.0 * math.pi)

# Banded Cholesky fill is ~N^3 doubles; keep it well under a gigabyte.
CHOLESKY_GUARD_N = 384


@dataclass
class FieldSample:
    """One realization of the field on the N x N box (row-major values)."""

    n: int
    values: np.ndarray  # shape (n, n)
    seed: int
    method: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.n, self.n):
            raise InvalidParameterError(
                "field values must have shape (%d, %d)" % (self.n, self.n))
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameterError("field values must be finite")


def centering_m(n):
    """Centering sequence m_N = 2 sqrt(g) log N - (3/4) sqrt(g) log log N."""
    if n <= 2:
        raise InvalidParameterError(
            "centering requires N >= 3 (log log N must be positive)")
    sg = math.sqrt(G_CONST)
    return 2.0 * sg * math.log(n) - 0.75 * sg * math.log(math.log(n))


def time_scale_s(n, beta):
    """Equilibrium time scale s_N = g N^{2 sqrt(g) beta} (log N)^{1 - 3 sqrt(g) beta / 4}.

    Computed via the identity s_N = g e^{beta m_N} log N, which avoids the
    enormous direct power for large N.
    """
    if beta <= 0:
        raise InvalidParameterError("beta must be positive")
    return G_CONST * math.exp(beta * centering_m(n)) * math.log(n)


def separation_radius(n):
    """r_N = N / log N."""
    if n < 2:
        raise InvalidParameterError("N >= 2 required for r_N")
    return n / math.log(n)


@dataclass
class ScaleConstants:
    """All the deterministic sequences for one (N, beta) pair."""

    n: int
    beta: float
    g: float
    alpha: float
    m_n: float
    s_n: float
    r_n: float

    def theta(self, k):
        return theta_steps(self.n, k)


def scales(n, beta):
    return ScaleConstants(n=n, beta=beta, g=G_CONST, alpha=ALPHA,
                          m_n=centering_m(n), s_n=time_scale_s(n, beta),
                          r_n=separation_radius(n))


def _dst_eigenvalues(n):
    # Killed-walk operator eigenvalues in the sine basis:
    # lambda_{jk} = 1 - (cos(pi (j+1)/(N+1)) + cos(pi (k+1)/(N+1))) / 2
    c = np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
    return 1.0 - 0.5 * (c[:, None] + c[None, :])


def _sample_dst(n, rng, count):
    lam = _dst_eigenvalues(n)
    xi = rng.standard_normal((count, n, n))
    coef = xi / np.sqrt(lam)[None, :, :]
    # dstn(type=1) applies 2*sin-matrix per axis; orthonormal basis needs
    # the 1/(2(N+1)) rescale.
    h = sfft.dstn(coef, type=1, axes=(1, 2)) / (2.0 * (n + 1))
    return h


_chol_cache = {}


def _banded_cholesky(n):
    """Upper-banded Cholesky factor R of the killed-walk operator, L = R^T R."""
    if n in _chol_cache:
        return _chol_cache[n]
    m = n * n
    bw = n  # coupling to (x+1, y) sits n slots away in row-major order
    ab = np.zeros((bw + 1, m))
    ab[bw, :] = 1.0
    for x in range(n):
        for y in range(n):
            i = x * n + y
            if y + 1 < n:
                ab[bw - 1, i + 1] = -0.25
            if x + 1 < n:
                ab[0, i + n] = -0.25
    r = sla.cholesky_banded(ab, lower=False)
    _chol_cache[n] = r
    return r


def _sample_cholesky(n, rng, count):
    if n > CHOLESKY_GUARD_N:
        raise ResourceLimitError(
            "banded Cholesky sampling is guarded at N = %d; "
            "use method='dst' for larger boxes" % CHOLESKY_GUARD_N)
    r = _banded_cholesky(n)
    xi = rng.standard_normal((n * n, count))
    # h = R^{-1} xi has covariance (R^T R)^{-1} = L^{-1} = G.
    h = sla.solve_banded((0, n), r, xi)
    return h.T.reshape(count, n, n)


def sample_field(n, seed, method="dst"):
    """Draw one field with the exact N(0, G_box) law; deterministic in
    (n, seed, method)."""
    return sample_fields(n, seed, 1, method=method)[0]


def sample_fields(n, seed, count, method="dst"):
    """Draw ``count`` independent fields from one seed (vectorized)."""
    if n < 2:
        raise InvalidParameterError("field side must be >= 2")
    if n > SIZE_GUARD_N * 4:
        raise ResourceLimitError("field side %d exceeds the sampler guard" % n)
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    rng = np.random.default_rng(seed)
    if method == "dst":
        values = _sample_dst(n, rng, count)
    elif method == "cholesky":
        values = _sample_cholesky(n, rng, count)
    else:
        raise InvalidParameterError("unknown sampling method %r" % (method,))
    return [FieldSample(n=n, values=values[i], seed=seed, method=method)
            for i in range(count)]


def spectral_green(n):
    """Dense G_box reconstructed from the sine-basis diagonalization.

    Deterministic cross-check against the sparse solver; O(N^4) memory, so
    small N only.
    """
    lam = _dst_eigenvalues(n)
    j = np.arange(1, n + 1)
    x = np.arange(n)
    phi = math.sqrt(2.0 / (n + 1)) * np.sin(
        np.pi * np.outer(x + 1, j) / (n + 1))
    basis = np.einsum("xj,yk->jkxy", phi, phi).reshape(n * n, n * n)
    return basis.T @ (basis / lam.reshape(-1)[:, None])


def superlevel_set(fld, lo, hi, closed_lo=True, closed_hi=False):
    """Vertices x with h_x - m_N in the given interval, row-major order.

    The interval is [lo, hi) by default; pass math.inf / -math.inf for rays.
    """
    m = centering_m(fld.n)
    c = fld.values - m
    mask_lo = (c >= lo) if closed_lo else (c > lo)
    mask_hi = (c <= hi) if closed_hi else (c < hi)
    xs, ys = np.nonzero(mask_lo & mask_hi)
    return list(zip(xs.tolist(), ys.tolist()))
