"""Numba kernels for the step-level simulation loops.

Everything here is deterministic given the explicit seeds.  Replica loops
reseed numba's per-thread generator at the top of each iteration, so results
do not depend on the thread count or scheduling.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def torus_visit_counts(n_side, budget, tx, ty, seeds):
    """Visits to (tx, ty) within ``budget`` steps of a torus walk from 0.

    The visit at step 0 counts.  One walk per seed.
    """
    out = np.zeros(len(seeds), dtype=np.int64)
    for rep in prange(len(seeds)):
        np.random.seed(seeds[rep])
        x = 0
        y = 0
        cnt = 0
        if x == tx and y == ty:
            cnt += 1
        for _ in range(budget):
            d = np.random.randint(0, 4)
            if d == 0:
                x = (x + 1) % n_side
            elif d == 1:
                x = (x - 1) % n_side
            elif d == 2:
                y = (y + 1) % n_side
            else:
                y = (y - 1) % n_side
            if x == tx and y == ty:
                cnt += 1
        out[rep] = cnt
    return out


@njit(cache=True, parallel=True)
def z2_ball_local_times(r2_exit, offmap, half, n_off, sx, sy, seeds):
    """Walk on Z^2 from (sx, sy) until first exit of the ball ||.|| < sqrt(r2_exit).

    Returns (visits, local_times): per replica, per tracked offset, the visit
    count and the sum of that many i.i.d. Exp(1) draws.  ``offmap`` maps
    (dx + half, dy + half) to the tracked-offset index, -1 if untracked.
    """
    n_rep = len(seeds)
    visits = np.zeros((n_rep, n_off), dtype=np.int64)
    loc = np.zeros((n_rep, n_off), dtype=np.float64)
    side = 2 * half + 1
    for rep in prange(n_rep):
        np.random.seed(seeds[rep])
        x = sx
        y = sy
        while x * x + y * y < r2_exit:
            if -half <= x <= half and -half <= y <= half:
                k = offmap[(x + half) * side + (y + half)]
                if k >= 0:
                    visits[rep, k] += 1
                    loc[rep, k] += -np.log(1.0 - np.random.random())
            d = np.random.randint(0, 4)
            if d == 0:
                x += 1
            elif d == 1:
                x -= 1
            elif d == 2:
                y += 1
            else:
                y -= 1
    return visits, loc


@njit(cache=True, parallel=True)
def torus_first_hit(n_side, ball_id, sx, sy, seeds, max_steps):
    """First trap ball hit by the torus walk from (sx, sy), per replica.

    ball_id is a flat n_side*n_side map: trap index inside a target ball,
    -1 elsewhere.  Returns -1 for a replica that exhausts max_steps.
    """
    out = np.full(len(seeds), -1, dtype=np.int64)
    for rep in prange(len(seeds)):
        np.random.seed(seeds[rep])
        x = sx
        y = sy
        for _ in range(max_steps):
            b = ball_id[x * n_side + y]
            if b >= 0:
                out[rep] = b
                break
            d = np.random.randint(0, 4)
            if d == 0:
                x = (x + 1) % n_side
            elif d == 1:
                x = (x - 1) % n_side
            elif d == 2:
                y = (y + 1) % n_side
            else:
                y = (y - 1) % n_side
    return out


@njit(cache=True)
def walk_until_clock(mean_hold, n_side, sx, sy, horizon, stop_mask, seed,
                     max_steps):
    """Embedded-chain walk run: record states and holding times until the
    clock restricted to ``stop_mask`` cells reaches ``horizon``.

    mean_hold is the flat array of e^{beta h}; the hold at each step is
    mean_hold * Exp(1).  Prefix sums use compensated (Kahan) accumulation.
    Returns (states, holds, n_steps, reached) with arrays sized max_steps;
    reached is False when the budget ran out first.
    """
    states = np.empty(max_steps, dtype=np.int64)
    holds = np.empty(max_steps, dtype=np.float64)
    np.random.seed(seed)
    x = sx
    y = sy
    clock = 0.0
    comp = 0.0
    n = 0
    reached = False
    while n < max_steps:
        idx = x * n_side + y
        e = -np.log(1.0 - np.random.random())
        hold = mean_hold[idx] * e
        states[n] = idx
        holds[n] = hold
        if stop_mask[idx]:
            yk = hold - comp
            t = clock + yk
            comp = (t - clock) - yk
            clock = t
        n += 1
        if clock >= horizon:
            reached = True
            break
        d = np.random.randint(0, 4)
        if d == 0:
            x = (x + 1) % n_side
        elif d == 1:
            x = (x - 1) % n_side
        elif d == 2:
            y = (y + 1) % n_side
        else:
            y = (y - 1) % n_side
    return states[:n], holds[:n], n, reached


@njit(cache=True)
def walk_sojourn(mean_hold, inball_id, n_side, n_traps, sx, sy, horizon,
                 seed, max_steps):
    """Per-trap sojourn time of the walk up to the clock horizon, without
    storing the trajectory (memory-free version of walk_until_clock for
    sojourn statistics).  Widths are clipped at the horizon.

    Returns (sojourn per trap, steps, reached)."""
    soj = np.zeros(n_traps, dtype=np.float64)
    np.random.seed(seed)
    x = sx
    y = sy
    clock = 0.0
    comp = 0.0
    n = 0
    reached = False
    while n < max_steps:
        idx = x * n_side + y
        e = -np.log(1.0 - np.random.random())
        hold = mean_hold[idx] * e
        width = hold
        if clock + hold > horizon:
            width = horizon - clock
        b = inball_id[idx]
        if b >= 0:
            soj[b] += width
        yk = hold - comp
        t = clock + yk
        comp = (t - clock) - yk
        clock = t
        n += 1
        if clock >= horizon:
            reached = True
            break
        d = np.random.randint(0, 4)
        if d == 0:
            x = (x + 1) % n_side
        elif d == 1:
            x = (x - 1) % n_side
        elif d == 2:
            y = (y + 1) % n_side
        else:
            y = (y - 1) % n_side
    return soj, n, reached


@njit(cache=True)
def scan_excursions(traj, n_side, inball_id, in_brn, centers, offmap, half,
                    n_off, seed, max_exc):
    """Excursion decomposition of a given discrete trajectory.

    Emits, per visit: entry step R (first step in a trap ball after being
    outside the r_N-neighbourhood), exit step S (first step outside the
    r_N-neighbourhood of all traps), the 0-based trap index at entry and the
    exponential-weighted local time per tracked ball offset.
    """
    n_steps = len(traj)
    R = np.empty(max_exc, dtype=np.int64)
    S = np.empty(max_exc, dtype=np.int64)
    ordinal = np.empty(max_exc, dtype=np.int64)
    loc = np.zeros((max_exc, n_off), dtype=np.float64)
    np.random.seed(seed)
    side = 2 * half + 1
    n_exc = 0
    inside = False
    trap = -1
    for j in range(n_steps):
        idx = traj[j]
        if not inside:
            b = inball_id[idx]
            if b >= 0:
                if n_exc >= max_exc:
                    break
                inside = True
                trap = b
                R[n_exc] = j
        if inside:
            # local-time accumulation around the entered trap's centre
            sx = idx // n_side
            sy = idx % n_side
            dx = (sx - centers[trap, 0]) % n_side
            if dx > n_side // 2:
                dx -= n_side
            dy = (sy - centers[trap, 1]) % n_side
            if dy > n_side // 2:
                dy -= n_side
            if -half <= dx <= half and -half <= dy <= half:
                k = offmap[(dx + half) * side + (dy + half)]
                if k >= 0:
                    loc[n_exc, k] += -np.log(1.0 - np.random.random())
            if not in_brn[idx]:
                S[n_exc] = j
                ordinal[n_exc] = trap
                n_exc += 1
                inside = False
                trap = -1
    return R[:n_exc], S[:n_exc], ordinal[:n_exc], loc[:n_exc]


@njit(cache=True)
def run_excursions(n_side, inball_id, in_brn, centers, offmap, half, n_off,
                   sx, sy, n_target, max_steps, seed):
    """Simulate a torus SRW and collect excursions on the fly (no trajectory
    storage).  Same bookkeeping as scan_excursions; stops after n_target
    completed excursions or max_steps steps."""
    R = np.empty(n_target, dtype=np.int64)
    S = np.empty(n_target, dtype=np.int64)
    ordinal = np.empty(n_target, dtype=np.int64)
    loc = np.zeros((n_target, n_off), dtype=np.float64)
    np.random.seed(seed)
    side = 2 * half + 1
    n_exc = 0
    inside = False
    trap = -1
    x = sx
    y = sy
    j = 0
    while j < max_steps and n_exc < n_target:
        idx = x * n_side + y
        if not inside:
            b = inball_id[idx]
            if b >= 0:
                inside = True
                trap = b
                R[n_exc] = j
        if inside:
            dx = (x - centers[trap, 0]) % n_side
            if dx > n_side // 2:
                dx -= n_side
            dy = (y - centers[trap, 1]) % n_side
            if dy > n_side // 2:
                dy -= n_side
            if -half <= dx <= half and -half <= dy <= half:
                k = offmap[(dx + half) * side + (dy + half)]
                if k >= 0:
                    loc[n_exc, k] += -np.log(1.0 - np.random.random())
            if not in_brn[idx]:
                S[n_exc] = j
                ordinal[n_exc] = trap
                n_exc += 1
                inside = False
                trap = -1
        d = np.random.randint(0, 4)
        if d == 0:
            x = (x + 1) % n_side
        elif d == 1:
            x = (x - 1) % n_side
        elif d == 2:
            y = (y + 1) % n_side
        else:
            y = (y - 1) % n_side
        j += 1
    return R[:n_exc], S[:n_exc], ordinal[:n_exc], loc[:n_exc], j
