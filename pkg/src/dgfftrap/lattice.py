"""Lattice geometry and discrete potential theory.

Exact Green functions of simple random walks killed on exiting a box or a
Euclidean ball, plus Monte Carlo estimates of step-count Green functions on
the torus.  The exact solvers are the oracles for most statistical tests in
the rest of the package.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import InvalidParameterError, ResourceLimitError

# Expected visit counts: g*log N is the leading diagonal asymptotic.
G_CONST = 2.0 / math.pi

# Refuse factorizations beyond this side length unless overridden.
SIZE_GUARD_N = 512
# Full dense tables get their own (much tighter) memory guard.
MAX_TABLE_VERTICES = 25_000


def torus_distance(a, b, n):
    """Euclidean distance on the side-n torus (componentwise wrap)."""
    if n < 1:
        raise InvalidParameterError("torus side must be >= 1, got %r" % (n,))
    dx = abs(a[0] - b[0]) % n
    dy = abs(a[1] - b[1]) % n
    dx = min(dx, n - dx)
    dy = min(dy, n - dy)
    return math.hypot(dx, dy)


def ball_offsets(r):
    """Integer offsets y with ||y|| < r (the open ball around 0).

    r=1 gives just the origin; r=2 gives the 5-point stencil plus nothing
    diagonal (sqrt(2) >= 2 is false, so diagonals are in only for r > sqrt(2)).
    """
    if r < 1:
        raise InvalidParameterError("ball radius must be >= 1, got %r" % (r,))
    k = int(math.ceil(r))
    pts = []
    for dx in range(-k, k + 1):
        for dy in range(-k, k + 1):
            if dx * dx + dy * dy < r * r:
                pts.append((dx, dy))
    return pts


def box_vertices(n):
    """Row-major list of the n*n box vertices."""
    xs, ys = np.divmod(np.arange(n * n), n)
    return np.column_stack([xs, ys]).astype(np.int64)


def ball_vertices(radius):
    """Lattice points of the open Euclidean ball of the given radius around 0."""
    pts = ball_offsets(radius)
    return np.array(pts, dtype=np.int64)


def _killed_operator(vertices):
    """Sparse I - P for the walk killed on leaving the vertex set.

    P moves to each of the four lattice neighbours with probability 1/4;
    neighbours outside the set are killing moves (their mass just vanishes).
    """
    index = {(int(x), int(y)): i for i, (x, y) in enumerate(vertices)}
    n = len(vertices)
    rows, cols, vals = [], [], []
    for i, (x, y) in enumerate(vertices):
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            j = index.get((int(x) + dx, int(y) + dy))
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(-0.25)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass
class GreenTable:
    """Exact Green function of a killed walk on a finite vertex set.

    values[i, j] is the expected number of visits to vertices[j] before
    killing, for the walk started at vertices[i].
    """

    domain: str
    param: float
    vertices: np.ndarray
    values: np.ndarray
    _index: dict = field(default=None, repr=False, compare=False)

    def index_of(self, p):
        if self._index is None:
            self._index = {(int(x), int(y)): i
                           for i, (x, y) in enumerate(self.vertices)}
        return self._index[(int(p[0]), int(p[1]))]

    def value(self, a, b):
        return float(self.values[self.index_of(a), self.index_of(b)])


def _check_size_guard(n_unknowns, side, override):
    if side > SIZE_GUARD_N and not override:
        raise ResourceLimitError(
            "side %d exceeds the factorization guard (%d); pass override=True"
            % (side, SIZE_GUARD_N))
    if n_unknowns > MAX_TABLE_VERTICES and not override:
        raise ResourceLimitError(
            "a dense table over %d vertices exceeds the memory guard (%d); "
            "use green_column for single rows or pass override=True"
            % (n_unknowns, MAX_TABLE_VERTICES))


def green_box(n, override=False):
    """Exact Green function of the walk killed on exiting the n*n box."""
    if n < 1:
        raise InvalidParameterError("box side must be >= 1, got %r" % (n,))
    verts = box_vertices(n)
    _check_size_guard(len(verts), n, override)
    op = _killed_operator(verts)
    values = splu(op.tocsc()).solve(np.eye(len(verts)))
    return GreenTable(domain="box", param=float(n), vertices=verts,
                      values=values)


def green_ball(radius, override=False):
    """Exact Green function of the walk killed on exiting the open ball."""
    verts = ball_vertices(radius)
    _check_size_guard(len(verts), int(math.ceil(radius)), override)
    op = _killed_operator(verts)
    values = splu(op.tocsc()).solve(np.eye(len(verts)))
    return GreenTable(domain="ball", param=float(radius), vertices=verts,
                      values=values)


def _green_column(vertices, source, override=False):
    op = _killed_operator(vertices)
    index = {(int(x), int(y)): i for i, (x, y) in enumerate(vertices)}
    i = index[(int(source[0]), int(source[1]))]
    e = np.zeros(len(vertices))
    e[i] = 1.0
    col = splu(op.tocsc()).solve(e)
    return col, index


def green_box_value(n, a, b, override=False):
    """Single Green function entry G_box(a, b), sparse solve of one column.

    Cheaper than green_box for large n where the dense table is infeasible.
    """
    if n < 1:
        raise InvalidParameterError("box side must be >= 1, got %r" % (n,))
    if n > SIZE_GUARD_N and not override:
        raise ResourceLimitError(
            "side %d exceeds the factorization guard" % n)
    col, index = _green_column(box_vertices(n), a)
    return float(col[index[(int(b[0]), int(b[1]))]])


def green_ball_value(radius, a, b, override=False):
    """Single Green function entry G_ball(a, b)."""
    if radius > SIZE_GUARD_N and not override:
        raise ResourceLimitError(
            "radius %r exceeds the factorization guard" % radius)
    col, index = _green_column(ball_vertices(radius), a)
    return float(col[index[(int(b[0]), int(b[1]))]])


def residual_norm(table):
    """Max-norm of (I - P_killed) G - I, the defining-equation residual."""
    op = _killed_operator(table.vertices)
    res = op @ table.values - np.eye(len(table.vertices))
    return float(np.max(np.abs(res)))


def theta_steps(n_side, n):
    """Step budget theta_N(n) = n * ceil(N^2 log N)."""
    if n_side < 1:
        raise InvalidParameterError("torus side must be >= 1")
    return n * math.ceil(n_side * n_side * math.log(n_side))


def green_torus_steps(n_side, n, target, replicas, seed):
    """Monte Carlo estimate of expected visits to ``target`` within
    theta_N(n) torus walk steps from the origin (visit at step 0 included).

    Returns (estimate, standard_error).
    """
    if replicas < 1:
        raise InvalidParameterError("replicas must be >= 1")
    if n_side < 1:
        raise InvalidParameterError("torus side must be >= 1")
    from ._kernels import torus_visit_counts

    budget = theta_steps(n_side, n)
    seeds = np.random.SeedSequence(seed).generate_state(replicas, np.uint64)
    counts = torus_visit_counts(
        np.int64(n_side), np.int64(budget),
        np.int64(target[0] % n_side), np.int64(target[1] % n_side),
        seeds)
    est = float(np.mean(counts))
    se = float(np.std(counts, ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return est, se
