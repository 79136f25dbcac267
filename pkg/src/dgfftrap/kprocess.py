"""Clock processes, (pre-)K-processes and the heavy-tailed Poisson landscape
sampler.

The full K-process over an infinite atom list is represented by finite
truncations: the landscape sampler discards atoms below a depth cutoff (only
finitely many lie above any positive cutoff), and the spatial simulator picks
the truncation level from a tail-mass tolerance.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import InvalidParameterError
from .field import ALPHA
from .walk import PathSample


@dataclass
class AtomList:
    """Trap locations in [0,1]^2 and depths, strictly descending in depth."""

    locations: np.ndarray  # (k, 2)
    depths: np.ndarray     # (k,)
    cutoff: float = 0.0

    def __post_init__(self):
        self.locations = np.asarray(self.locations, dtype=np.float64)
        self.depths = np.asarray(self.depths, dtype=np.float64)
        if len(self.locations) != len(self.depths):
            raise InvalidParameterError("locations/depths length mismatch")
        if np.any(self.depths <= 0):
            raise InvalidParameterError("depths must be positive")
        if np.any(np.diff(self.depths) > 0):
            raise InvalidParameterError("depths must be descending")

    def __len__(self):
        return len(self.depths)


@dataclass
class ZSpec:
    """Stand-in for the base random measure steering atom locations.

    kind: "pointmass" (location attribute), "uniform", or "discrete"
    (atoms + weights).  These are configurable placeholders, not the true
    law, which is not constructively available.
    """

    kind: str
    total_mass: float = 1.0
    location: tuple = (0.5, 0.5)
    atoms: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self):
        if self.total_mass <= 0 or not math.isfinite(self.total_mass):
            raise InvalidParameterError("total_mass must be finite positive")
        if self.kind == "discrete":
            self.atoms = np.asarray(self.atoms, dtype=np.float64)
            w = np.asarray(self.weights, dtype=np.float64)
            if np.any(w <= 0):
                raise InvalidParameterError("weights must be positive")
            self.weights = w / w.sum()
        elif self.kind not in ("pointmass", "uniform"):
            raise InvalidParameterError("unknown ZSpec kind %r" % (self.kind,))

    def sample_locations(self, count, rng):
        if self.kind == "pointmass":
            return np.tile(np.asarray(self.location, dtype=float),
                           (count, 1))
        if self.kind == "uniform":
            return rng.random((count, 2))
        idx = rng.choice(len(self.atoms), size=count, p=self.weights)
        return self.atoms[idx]


def sample_chi(z, beta, kappa_beta, tau_min, seed):
    """Draw the atoms above ``tau_min`` of the Poisson landscape with
    conditional intensity kappa_beta * |Z| * t^{-1-alpha/beta} dt in depth
    and location law Z-hat.

    The expected atom count above level t is kappa_beta * |Z| * (beta/alpha)
    * t^{-alpha/beta}; depths are exact inverse-CDF Pareto draws
    tau_min * U^{-beta/alpha}.
    """
    if beta <= ALPHA:
        raise InvalidParameterError(
            "requires beta > alpha = sqrt(2 pi) (glassy phase)")
    if tau_min <= 0:
        raise InvalidParameterError(
            "tau_min must be positive (infinitely many atoms otherwise)")
    if kappa_beta <= 0:
        raise InvalidParameterError("kappa_beta must be positive")
    rng = np.random.default_rng(seed)
    a = ALPHA / beta
    mean_count = kappa_beta * z.total_mass * (1.0 / a) * tau_min ** (-a)
    count = int(rng.poisson(mean_count))
    depths = tau_min * rng.random(count) ** (-1.0 / a)
    locations = z.sample_locations(count, rng)
    order = np.argsort(-depths, kind="stable")
    return AtomList(locations=locations[order], depths=depths[order],
                    cutoff=tau_min)


def simulate_clock(atoms, u, seed, m_values=()):
    """One draw of the clock process T(u) = sum_k tau_k Gamma(A_k(u)), with
    A_k(u) i.i.d. Poisson(u), plus its M-truncations under the same
    randomness.

    Returns (T(u), {M: T_M(u)}).
    """
    if u < 0:
        raise InvalidParameterError("u must be nonnegative")
    rng = np.random.default_rng(seed)
    k = len(atoms)
    counts = rng.poisson(u, size=k)
    sums = np.where(counts > 0, rng.gamma(np.maximum(counts, 1)), 0.0)
    contrib = atoms.depths * sums
    prefix = np.concatenate([[0.0], np.cumsum(contrib)])
    total = float(prefix[-1])
    truncated = {m: float(prefix[min(m, k)]) for m in m_values}
    return total, truncated


def _arrival_table(atoms, m, u_end, rng):
    """All Poisson arrivals of the first m atom clocks up to internal time
    u_end, sorted by arrival time.  Returns (arrival times, atom index,
    holding length tau_k * e)."""
    times, idx, holds = [], [], []
    for k in range(m):
        n_k = rng.poisson(u_end)
        if n_k == 0:
            continue
        t_k = np.sort(rng.random(n_k)) * u_end
        times.append(t_k)
        idx.append(np.full(n_k, k, dtype=np.int64))
        holds.append(atoms.depths[k] * rng.exponential(size=n_k))
    if not times:
        return (np.empty(0), np.empty(0, dtype=np.int64), np.empty(0))
    times = np.concatenate(times)
    order = np.argsort(times, kind="stable")
    return times[order], np.concatenate(idx)[order], np.concatenate(holds)[order]


def simulate_pre_k(atoms, m, horizon, seed):
    """Spatial pre-K-process: uniform hopping over the top m traps
    (self-loops included) with Exp(mean tau_k) holds at trap k.

    Returns (path, trap index sequence, holds).
    """
    if m < 1 or m > len(atoms):
        raise InvalidParameterError("need 1 <= M <= number of atoms")
    if horizon <= 0:
        raise InvalidParameterError("horizon must be positive")
    rng = np.random.default_rng(seed)
    idx, holds = [], []
    elapsed = 0.0
    chunk = max(16, int(4 * horizon * m / atoms.depths[:m].sum()))
    while elapsed < horizon:
        ks = rng.integers(0, m, size=chunk)
        es = rng.exponential(size=chunk) * atoms.depths[ks]
        idx.append(ks)
        holds.append(es)
        elapsed += float(es.sum())
    idx = np.concatenate(idx)
    holds = np.concatenate(holds)
    cum = np.cumsum(holds)
    stop = int(np.searchsorted(cum, horizon)) + 1
    idx, holds, cum = idx[:stop], holds[:stop], cum[:stop]
    times = np.concatenate([[0.0], cum[:-1]])
    path = PathSample(state_space="unit-square", times=times,
                      states=atoms.locations[idx], horizon=float(horizon))
    return path, idx, holds


def truncation_level(atoms, tail_tolerance):
    """Smallest M with tail depth mass sum_{k>M} tau_k <= tol * sum tau_k."""
    if tail_tolerance <= 0:
        raise InvalidParameterError("tail tolerance must be positive")
    total = float(atoms.depths.sum())
    suffix = np.concatenate([np.cumsum(atoms.depths[::-1])[::-1], [0.0]])
    # suffix[m] = sum_{k >= m} tau_k (0-based), i.e. the tail after m atoms
    for m in range(1, len(atoms) + 1):
        if suffix[m] <= tail_tolerance * total:
            return m
    return len(atoms)


def simulate_spatial_k(atoms, horizon, tail_tolerance, seed):
    """Spatial K-process up to a Lebesgue-small disagreement set: simulate
    the pre-K-process at the tail-tolerance truncation level.

    Returns (path, m_used).
    """
    m_used = truncation_level(atoms, tail_tolerance)
    path, _, _ = simulate_pre_k(atoms, m_used, horizon, seed)
    return path, m_used


def truncation_bad_set(atoms, m, horizon, seed):
    """Lebesgue measure of {t <= horizon : Y(t) != Y_M(t)} under the
    shared-randomness coupling (same Poisson arrivals and exponentials drive
    both the full finite-atom process and its M-truncation)."""
    if m < 1 or m > len(atoms):
        raise InvalidParameterError("need 1 <= M <= number of atoms")
    if horizon <= 0:
        raise InvalidParameterError("horizon must be positive")
    rng = np.random.default_rng(seed)
    k_all = len(atoms)
    total_rate = float(atoms.depths.sum())
    top_rate = float(atoms.depths[:m].sum())
    # internal time large enough for both clocks to cover the horizon
    u_end = 4.0 * horizon / top_rate + 16.0 / min(1.0, top_rate)
    while True:
        times, idx, holds = _arrival_table(atoms, k_all, u_end, rng)
        t_full = np.cumsum(holds)
        mask = idx < m
        t_trunc_vals = np.cumsum(holds[mask])
        if (len(t_full) and t_full[-1] >= horizon
                and len(t_trunc_vals) and t_trunc_vals[-1] >= horizon):
            break
        u_end *= 2.0  # rare: extend the window and redraw
    # piecewise segments of the full process: state idx[i] on
    # [t_full[i-1], t_full[i]); truncated process analogously over mask
    full_times = np.concatenate([[0.0], t_full])
    trunc_idx = idx[mask]
    trunc_times = np.concatenate([[0.0], t_trunc_vals])
    cuts = np.unique(np.concatenate([
        full_times[full_times < horizon], trunc_times[trunc_times < horizon],
        [horizon]]))
    lefts = cuts[:-1]
    widths = np.diff(cuts)
    s_full = idx[np.searchsorted(t_full, lefts, side="right")]
    s_trunc = trunc_idx[np.searchsorted(t_trunc_vals, lefts, side="right")]
    return float(np.sum(widths[s_full != s_trunc]))
