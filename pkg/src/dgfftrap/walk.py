"""Event-driven simulation of the continuous-time walk in the quenched
field, its clock processes, trace process and excursion decomposition, plus
the standalone simple-random-walk experiments (local times in balls, uniform
hitting of separated balls).
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .errors import BudgetExceededError, InvalidParameterError
from .field import separation_radius
from .lattice import ball_offsets, theta_steps, torus_distance
from .traps import trap_ball_mask


@dataclass
class PathSample:
    """Right-continuous piecewise-constant path: value on [t_i, t_{i+1})
    is states[i].  States are (x, y) rows; +inf rows encode the fictitious
    point at infinity of K-processes."""

    state_space: str  # "torus" | "unit-square"
    times: np.ndarray
    states: np.ndarray
    horizon: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.float64)
        if len(self.times) != len(self.states):
            raise InvalidParameterError("times/states length mismatch")
        if len(self.times):
            if self.times[0] != 0.0:
                raise InvalidParameterError("first jump time must be 0")
            if np.any(np.diff(self.times) <= 0):
                raise InvalidParameterError("jump times must be increasing")
            if self.times[-1] > self.horizon:
                raise InvalidParameterError("jump times exceed the horizon")


@dataclass
class ClockTrace:
    """Per-step holding contributions e^{beta h} * E_j of one walk run."""

    n: int
    states_idx: np.ndarray  # flat torus index per step
    holds: np.ndarray

    def clock(self):
        """Full clock process t(k), k = 0..n_steps (prefix sums)."""
        return np.concatenate([[0.0], np.cumsum(self.holds)])

    def trace_clock(self, landscape):
        """Trace clock t^{(r,M)}(k): only contributions from steps inside
        the deep-trap balls."""
        mask = trap_ball_mask(landscape).reshape(-1)[self.states_idx]
        return np.concatenate([[0.0], np.cumsum(self.holds * mask)])

    def in_deep_trap(self, landscape):
        return trap_ball_mask(landscape).reshape(-1)[self.states_idx]


@dataclass
class ExcursionRecord:
    k: int
    r_step: int
    s_step: int
    ordinal: int             # 1-based rank of the visited trap
    local_times: dict        # (dx, dy) offset -> raw exponential-weighted sum


def _mean_holds(fld, beta):
    logm = beta * fld.values
    if float(np.max(logm)) > 700.0:
        raise InvalidParameterError(
            "beta * max(h) overflows double precision holding times")
    return np.exp(logm).reshape(-1)


def run_walk(fld, beta, horizon, seed, start=(0, 0), max_steps=100_000_000,
             stop_landscape=None):
    """Simulate the walk until elapsed time reaches ``horizon``.

    With ``stop_landscape`` set, runs until the *trace* clock of that
    landscape reaches the horizon instead (the full path is still returned);
    the trace path is then defined on all of [0, horizon].
    """
    if horizon <= 0:
        raise InvalidParameterError("horizon must be positive")
    mean_hold = _mean_holds(fld, beta)
    n = fld.n
    if stop_landscape is None:
        stop_mask = np.ones(n * n, dtype=np.uint8)
    else:
        stop_mask = trap_ball_mask(stop_landscape).reshape(-1).astype(np.uint8)
    states, holds, n_steps, reached = _kernels.walk_until_clock(
        mean_hold, np.int64(n), np.int64(start[0] % n), np.int64(start[1] % n),
        float(horizon), stop_mask,
        np.uint64(np.random.SeedSequence(seed).generate_state(1, np.uint64)[0]),
        np.int64(max_steps))
    if not reached:
        raise BudgetExceededError(
            "step budget %d exhausted before the horizon" % max_steps,
            steps_completed=int(n_steps))
    clock = ClockTrace(n=n, states_idx=states, holds=holds)
    t = clock.clock()
    # the full clock is the comparison axis only when it is also the
    # stopping clock; with a stop landscape the path ends at the total time
    end = float(horizon) if stop_landscape is None else float(t[-1])
    # holds tiny relative to the running clock vanish in the cumsum; drop
    # the resulting zero-width intervals (right continuity keeps the last
    # state at each jump time)
    keep = (np.diff(t) > 0) & (t[:-1] < end)
    xy = np.column_stack([states[keep] // n, states[keep] % n]).astype(float)
    path = PathSample(state_space="torus", times=t[:-1][keep], states=xy,
                      horizon=end)
    return path, clock


def walk_sojourn_times(fld, landscape, beta, horizon, seed,
                       max_steps=20_000_000_000):
    """Time the walk spends in each deep-trap ball up to the clock horizon
    (nearest-trap attribution on overlaps, widths clipped at the horizon).

    Streams the walk without storing the trajectory, so very long runs are
    memory-free.
    """
    if horizon <= 0:
        raise InvalidParameterError("horizon must be positive")
    mean_hold = _mean_holds(fld, beta)
    inball, _, _ = _membership_maps(landscape, fld.n)
    kseed = np.uint64(np.random.SeedSequence(seed).generate_state(
        1, np.uint64)[0])
    soj, n_steps, reached = _kernels.walk_sojourn(
        mean_hold, inball, np.int64(fld.n), np.int64(landscape.m),
        np.int64(0), np.int64(0), float(horizon), kseed, np.int64(max_steps))
    if not reached:
        raise BudgetExceededError(
            "step budget %d exhausted before the horizon" % max_steps,
            steps_completed=int(n_steps))
    return soj


def trace_process(path, clock, landscape):
    """Time-changed path: excise all time outside the deep-trap balls.

    The returned path lives on [0, total in-trap time].
    """
    if landscape.n != clock.n:
        raise InvalidParameterError("landscape/clock size mismatch")
    mask = clock.in_deep_trap(landscape)
    holds = clock.holds[mask]
    states = clock.states_idx[mask]
    total = float(np.sum(holds))
    if len(holds) == 0:
        return PathSample(state_space="torus", times=np.empty(0),
                          states=np.empty((0, 2)), horizon=0.0)
    t = np.concatenate([[0.0], np.cumsum(holds)])
    keep = np.diff(t) > 0
    xy = np.column_stack([states[keep] // clock.n,
                          states[keep] % clock.n]).astype(float)
    return PathSample(state_space="torus", times=t[:-1][keep], states=xy,
                      horizon=total)


def _offset_tables(r):
    offs = ball_offsets(r)
    half = int(math.ceil(r))
    side = 2 * half + 1
    offmap = np.full(side * side, -1, dtype=np.int64)
    for k, (dx, dy) in enumerate(offs):
        offmap[(dx + half) * side + (dy + half)] = k
    return offs, offmap, half


def _membership_maps(landscape, n):
    """(inball_id, in_brn): trap index within B_r of each trap (overlaps go
    to the nearest trap, the deeper one on ties), and the union of
    r_N-balls."""
    r_n = separation_radius(n)
    inball = np.full((n, n), -1, dtype=np.int32)
    dist = np.full((n, n), np.inf)
    for t in landscape.traps:  # rank order, so deeper traps win dist ties
        x, y = t.position
        for dx, dy in ball_offsets(landscape.r):
            d = math.hypot(dx, dy)
            cx, cy = (x + dx) % n, (y + dy) % n
            if d < dist[cx, cy]:
                dist[cx, cy] = d
                inball[cx, cy] = t.rank - 1
    in_brn = trap_ball_mask(landscape, radius=r_n).astype(np.uint8)
    centers = np.array([t.position for t in landscape.traps], dtype=np.int64)
    return inball.reshape(-1), in_brn.reshape(-1), centers


def excursions(walk_steps, landscape, n, seed, max_excursions=None):
    """Excursion decomposition (R_k, S_k, ordinal, local times) of a discrete
    trajectory given as flat torus indices or (x, y) rows.

    For a non-separated landscape the ordinal is drawn uniformly and the
    local-time vector is a single mean-g exponential times log N (so that the
    caller's 1/log N normalization recovers the substitute variable), per the
    fallback convention of the excursion statistics.
    """
    traj = np.asarray(walk_steps)
    if traj.ndim == 2:
        traj = traj[:, 0].astype(np.int64) * n + traj[:, 1].astype(np.int64)
    traj = traj.astype(np.int64)
    inball, in_brn, centers = _membership_maps(landscape, n)
    offs, offmap, half = _offset_tables(landscape.r)
    ss = np.random.SeedSequence(seed)
    kseed = np.uint64(ss.generate_state(1, np.uint64)[0])
    cap = max_excursions or len(traj)
    r_steps, s_steps, ords, loc = _kernels.scan_excursions(
        traj, np.int64(n), inball, in_brn, centers, offmap,
        np.int64(half), np.int64(len(offs)), kseed, np.int64(cap))
    return _build_records(r_steps, s_steps, ords, loc, offs, landscape, n,
                          ss)


def _build_records(r_steps, s_steps, ords, loc, offs, landscape, n, ss):
    from .lattice import G_CONST
    records = []
    if not landscape.separated:
        rng = np.random.default_rng(ss.spawn(1)[0])
        ords = rng.integers(0, landscape.m, size=len(r_steps))
        subs = rng.exponential(G_CONST, size=len(r_steps)) * math.log(n)
        loc = np.repeat(subs[:, None], len(offs), axis=1)
    for k in range(len(r_steps)):
        records.append(ExcursionRecord(
            k=k + 1, r_step=int(r_steps[k]), s_step=int(s_steps[k]),
            ordinal=int(ords[k]) + 1,
            local_times={offs[j]: float(loc[k, j]) for j in range(len(offs))}))
    return records


def collect_excursions(fld, landscape, n_target, seed, start=(0, 0),
                       max_steps=20_000_000_000):
    """Simulate a torus SRW from ``start`` and collect ``n_target``
    excursions without storing the trajectory.

    Returns (R, S, ordinals (1-based), local_times array, offsets,
    steps_used).  Requires a separated landscape (the uniform-ordinal
    fallback needs the full trajectory bookkeeping of :func:`excursions`).
    """
    if not landscape.separated:
        raise InvalidParameterError(
            "collect_excursions requires a separated landscape")
    n = fld.n
    inball, in_brn, centers = _membership_maps(landscape, n)
    offs, offmap, half = _offset_tables(landscape.r)
    kseed = np.uint64(np.random.SeedSequence(seed).generate_state(
        1, np.uint64)[0])
    r_steps, s_steps, ords, loc, used = _kernels.run_excursions(
        np.int64(n), inball, in_brn, centers, offmap, np.int64(half),
        np.int64(len(offs)), np.int64(start[0] % n), np.int64(start[1] % n),
        np.int64(n_target), np.int64(max_steps), kseed)
    if len(r_steps) < n_target:
        raise BudgetExceededError(
            "collected %d/%d excursions in %d steps"
            % (len(r_steps), n_target, used), steps_completed=int(used))
    return r_steps, s_steps, ords + 1, loc, offs, int(used)


def macroscopic_jumps(excursion_list, theta):
    """Number of excursions whose entry step R_k is at most theta."""
    return sum(1 for e in excursion_list if e.r_step <= theta)


def local_time_experiment(n, r, start, replicas, seed):
    """Local times of the Z^2 walk in B_r before exiting B_{r_N}, r_N = N/log N.

    Returns (visits, normalized local times L/log N, offsets); one row per
    replica, one column per offset of the open r-ball.
    """
    if replicas < 1:
        raise InvalidParameterError("replicas must be >= 1")
    r_n = separation_radius(n)
    if r_n < r + 2:
        raise InvalidParameterError("requires r_N = N/log N >= r + 2")
    if math.hypot(*start) >= r:
        raise InvalidParameterError("start must lie in the open r-ball")
    offs, offmap, half = _offset_tables(r)
    seeds = np.random.SeedSequence(seed).generate_state(replicas, np.uint64)
    visits, loc = _kernels.z2_ball_local_times(
        float(r_n) ** 2, offmap, np.int64(half), np.int64(len(offs)),
        np.int64(start[0]), np.int64(start[1]), seeds)
    return visits, loc / math.log(n), offs


def hitting_experiment(n, r, centers, start, replicas, seed, max_steps=None):
    """Which of the M separated balls does the torus walk hit first?

    Centers must be pairwise farther than r_N/2 apart and the start farther
    than r_N/2 from each of them.  Returns hit counts per center.
    """
    if replicas < 1:
        raise InvalidParameterError("replicas must be >= 1")
    r_n = separation_radius(n)
    for i in range(len(centers)):
        d0 = torus_distance(start, centers[i], n)
        if d0 <= r_n / 2:
            raise InvalidParameterError(
                "start %r within r_N/2 of center %r" % (start, centers[i]))
        for j in range(i + 1, len(centers)):
            if torus_distance(centers[i], centers[j], n) <= r_n / 2:
                raise InvalidParameterError(
                    "centers %r and %r within r_N/2"
                    % (centers[i], centers[j]))
    ball_id = np.full((n, n), -1, dtype=np.int64)
    for i, (cx, cy) in enumerate(centers):
        for dx, dy in ball_offsets(r):
            ball_id[(cx + dx) % n, (cy + dy) % n] = i
    if max_steps is None:
        max_steps = 50 * theta_steps(n, 1)
    seeds = np.random.SeedSequence(seed).generate_state(replicas, np.uint64)
    hits = _kernels.torus_first_hit(
        np.int64(n), ball_id.reshape(-1), np.int64(start[0] % n),
        np.int64(start[1] % n), seeds, np.int64(max_steps))
    if np.any(hits < 0):
        raise BudgetExceededError(
            "%d replicas exhausted the step budget" % int(np.sum(hits < 0)))
    return np.bincount(hits, minlength=len(centers))
