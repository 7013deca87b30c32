"""Skorokhod metrics on step paths, the metric on D[0, inf), and Prokhorov distance.

Both Skorokhod metrics are computed by an alignment search.  A time change
only matters through the places ``s_j`` it sends onto the jump times ``c_j``
of ``y``.  Walking through the pieces of ``x`` and ``y`` in order gives a
monotone path in a lattice of (x-piece, y-piece) cells.  Each visited cell
must have values within ``eps``, and the ``s_j`` must satisfy the window
constraints of the chosen norm.  Feasibility is monotone in ``eps``, and the
critical ``eps`` lies in a finite candidate set.  The distance is therefore
the smallest feasible candidate.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_finite_array, check_int, check_real
from .errors import CapacityError, DomainError, ModeError
from .paths import DEFAULT_GRID_STEP, DEFAULT_TOL, CadlagPath, discretize, uniform_distance

EXACT_PROKHOROV_ATOMS = 15
_MAX_CIRC_CANDIDATES = 2_000_000


class TimeChange:
    """Increasing piecewise-linear bijection of ``[0, T]`` given by its knots."""

    __slots__ = ("t", "lam")

    def __init__(self, knots):
        arr = check_finite_array(knots, "knots", ndim=2)
        if arr.shape[1] != 2 or arr.shape[0] < 2:
            raise DomainError("knots must be a list of at least two (t, lambda_t) pairs")
        t, lam = arr[:, 0].copy(), arr[:, 1].copy()
        if t[0] != 0 or lam[0] != 0:
            raise DomainError("the first knot must be (0, 0)")
        if t[-1] != lam[-1] or t[-1] <= 0:
            raise DomainError("the last knot must be (T, T)")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(lam) <= 0):
            raise DomainError("knots must be strictly increasing in both coordinates")
        t.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "lam", lam)

    def __setattr__(self, name, value):
        raise AttributeError("TimeChange is immutable")

    @classmethod
    def identity(cls, horizon=1.0):
        return cls([(0.0, 0.0), (horizon, horizon)])

    @property
    def horizon(self):
        return float(self.t[-1])

    def __call__(self, s):
        return np.interp(s, self.t, self.lam)

    def inverse(self, u):
        return np.interp(u, self.lam, self.t)


def timechange_norms(lam):
    """``(||lambda - 1||, ||lambda||°)``; both are extremal at knots or on segments."""
    dev = float(np.max(np.abs(lam.lam - lam.t)))
    slopes = np.diff(lam.lam) / np.diff(lam.t)
    return dev, float(np.max(np.abs(np.log(slopes))))


def compose(y, lam):
    """The path ``t -> y(lambda(t))``."""
    if lam.horizon != y.horizon:
        raise DomainError("time change and path live on different horizons")
    cuts = np.union1d(lam.t[:-1], lam.inverse(y.breaks))
    cuts = cuts[(cuts >= 0) & (cuts < y.horizon)]
    cuts[0] = 0.0
    cuts = np.unique(cuts)
    nxt = np.append(cuts[1:], y.horizon)
    lo, hi = lam(cuts), lam(nxt)
    seg = np.searchsorted(y.breaks, lam(0.5 * (cuts + nxt)), side="right") - 1
    kn = y.knots
    length = kn[seg + 1] - kn[seg]
    s0, e0 = y.starts[seg], y.ends[seg]
    starts = np.where(s0 == e0, s0, s0 + (e0 - s0) * ((lo - kn[seg]) / length))
    ends = np.where(s0 == e0, e0, s0 + (e0 - s0) * ((hi - kn[seg]) / length))
    return CadlagPath(cuts, starts, ends, y.terminal, y.horizon)


# ---------------------------------------------------------------------------
# alignment engine


@dataclass(frozen=True)
class _Steps:
    A: np.ndarray   # 0, jump times..., T
    v: np.ndarray   # piece values
    term: float

    @classmethod
    def of(cls, x):
        return cls(np.append(x.breaks, x.horizon), np.asarray(x.starts), float(x.terminal))


def _steps_pair(x, y, mode, grid_step):
    if x.horizon != y.horizon:
        raise DomainError("paths live on different horizons")
    ex = ey = 0.0
    if not (x.is_step and y.is_step):
        if mode == "exact":
            raise ModeError("exact mode needs piecewise-constant paths; use mode='grid'")
        if mode != "grid":
            raise DomainError(f"mode must be 'exact' or 'grid', got {mode!r}")
        x, ex = discretize(x, grid_step)
        y, ey = discretize(y, grid_step)
    return _Steps.of(x), _Steps.of(y), ex + ey


def _row_propagate(seed, allow):
    """Reachability along a row: ``R[j] = seed[j] or (R[j-1] and allow[j])``."""
    idx = np.arange(seed.size)
    last_seed = np.maximum.accumulate(np.where(seed, idx, -1))
    last_block = np.maximum.accumulate(np.where(allow, -1, idx))
    return (last_seed >= 0) & (last_seed >= last_block)


def _d_feasible(X, Y, eps, tol):
    """Vectorized lattice reachability for the deviation metric ``d``."""
    if abs(X.term - Y.term) > eps + tol:
        return False
    A, C = X.A, Y.A
    cell = np.abs(X.v[:, None] - Y.v[None, :]) <= eps + tol
    c = C[1:-1]
    P, Q = X.v.size, Y.v.size
    row = None
    for i in range(P):
        ymove = np.zeros(Q, dtype=bool)
        ymove[1:] = (c - eps <= A[i + 1] + tol) & (c + eps >= A[i] - tol)
        allow = ymove & cell[i]
        if i == 0:
            seed = np.zeros(Q, dtype=bool)
            seed[0] = cell[0, 0]
        else:
            seed = row & cell[i]
            diag = np.zeros(Q, dtype=bool)
            diag[1:] = row[:-1] & (np.abs(A[i] - c) <= eps + tol)
            seed |= diag & cell[i]
        row = _row_propagate(seed, allow)
        if not row.any():
            return False
    return bool(row[-1])


def _merge(intervals, tol):
    if not intervals:
        return []
    intervals.sort()
    out = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(iv) for iv in out]


def _clip(intervals, lo, hi):
    out = []
    for a, b in intervals:
        a2, b2 = max(a, lo), min(b, hi)
        if a2 <= b2:
            out.append((a2, b2))
    return out


class _Aligner:
    """Interval-set propagation over the lattice, for either norm.

    ``S[i, j]`` is the set of positions of the ``j``-th jump of ``y`` over all
    admissible prefixes that end in cell ``(i, j)``.
    """

    def __init__(self, X, Y, eps, kind, tol, gap=0.0):
        self.X, self.Y, self.eps, self.kind, self.tol, self.gap = X, Y, eps, kind, tol, gap

    def gap_bounds(self, j):
        C = self.Y.A
        if self.kind == "d":
            return self.gap, math.inf
        dc = C[j] - C[j - 1]
        lo = dc * math.exp(-self.eps) * (1 - 1e-12) - self.tol
        return max(lo, self.gap), dc * math.exp(self.eps) * (1 + 1e-12) + self.tol

    def window(self, j):
        if self.kind == "d":
            c = self.Y.A[j]
            return c - self.eps - self.tol, c + self.eps + self.tol
        return -math.inf, math.inf

    def run(self):
        X, Y, eps, tol = self.X, self.Y, self.eps, self.tol
        if abs(X.term - Y.term) > eps + tol:
            return None
        A = X.A
        P, Q = X.v.size, Y.v.size
        cell = np.abs(X.v[:, None] - Y.v[None, :]) <= eps + tol
        S = {}
        for i in range(P):
            for j in range(Q):
                if not cell[i, j]:
                    S[i, j] = []
                    continue
                if i == 0 and j == 0:
                    S[i, j] = [(0.0, 0.0)]
                    continue
                parts = []
                if i >= 1:
                    parts += _clip(S[i - 1, j], -math.inf, A[i] + tol)
                if j >= 1:
                    g_lo, g_hi = self.gap_bounds(j)
                    w_lo, w_hi = self.window(j)
                    shifted = [(a + g_lo, b + g_hi) for a, b in S[i, j - 1]]
                    parts += _clip(shifted, max(A[i] - tol, w_lo), min(A[i + 1] + tol, w_hi))
                if i >= 1 and j >= 1 and S[i - 1, j - 1]:
                    g_lo, g_hi = self.gap_bounds(j)
                    w_lo, w_hi = self.window(j)
                    prev = _clip(S[i - 1, j - 1], -math.inf, A[i] + tol)
                    if w_lo <= A[i] <= w_hi and any(a + g_lo <= A[i] + tol and A[i] <= b + g_hi + tol
                                                   for a, b in prev):
                        parts.append((A[i], A[i]))
                S[i, j] = _merge(parts, tol)
        self.S = S
        return S

    def end_ok(self, s_set):
        """Positions of the last jump of ``y`` compatible with fixing the horizon."""
        T = self.X.A[-1]
        if self.kind == "d":
            return _clip(s_set, -math.inf, T - self.gap)
        cq = self.Y.A[-2]
        dc = T - cq
        lo = T - dc * math.exp(self.eps) * (1 + 1e-12) - self.tol
        hi = T - max(dc * math.exp(-self.eps) * (1 - 1e-12) - self.tol, self.gap)
        return _clip(s_set, lo, hi)

    def feasible(self):
        S = self.run()
        if S is None:
            return False
        return bool(self.end_ok(S[self.X.v.size - 1, self.Y.v.size - 1]))


def _value_candidates(X, Y):
    vals = np.abs(X.v[:, None] - Y.v[None, :]).ravel()
    return np.concatenate([vals, [abs(X.term - Y.term), 0.0]])


def _pos_diffs(a):
    d = np.subtract.outer(a, a)
    return d[d > 0]


def _smallest_feasible(cands, feasible):
    cands = np.unique(cands)
    lo, hi = 0, cands.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(float(cands[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    error_bound: float


def _constant_shortcut(x, y):
    # composing a constant path with any time change leaves it unchanged
    if x.n_segments == 1 and x.is_step and x.terminal == x.starts[0]:
        return uniform_distance(x, y)
    if y.n_segments == 1 and y.is_step and y.terminal == y.starts[0]:
        return uniform_distance(x, y)
    return None


def skorokhod_distance(x, y, kind="d", *, mode="exact", grid_step=DEFAULT_GRID_STEP, tol=DEFAULT_TOL):
    """Skorokhod distance with an error bound.

    ``kind`` is ``'d'`` (deviation norm) or ``'dcirc'`` (slope norm).  In
    ``mode='grid'`` non-step paths are replaced by :func:`discretize`, and the
    discretization errors are returned as the bound.
    """
    if kind not in ("d", "dcirc"):
        raise DomainError(f"kind must be 'd' or 'dcirc', got {kind!r}")
    if x.horizon != y.horizon:
        raise DomainError("paths live on different horizons")
    short = _constant_shortcut(x, y)
    if short is not None:
        return DistanceEstimate(short, 0.0)
    X, Y, err = _steps_pair(x, y, mode, grid_step)
    vals = _value_candidates(X, Y)
    if kind == "d":
        times = np.abs(X.A[:, None] - Y.A[None, :]).ravel()
        value = _smallest_feasible(np.concatenate([vals, times]),
                                   lambda e: _d_feasible(X, Y, e, tol))
        return DistanceEstimate(value, err)

    def feas(e):
        return _Aligner(X, Y, e, "dcirc", tol).feasible()

    da, dc = _pos_diffs(X.A), _pos_diffs(Y.A)
    if da.size * dc.size <= _MAX_CIRC_CANDIDATES:
        logs = np.abs(np.log(np.divide.outer(da, dc))).ravel()
        return DistanceEstimate(_smallest_feasible(np.concatenate([vals, logs]), feas), err)
    # too many slope candidates: bracket by value candidates, then bisect
    vals = np.unique(vals)
    hi_idx = int(np.searchsorted(vals, _smallest_feasible(vals, feas)))
    lo, hi = (float(vals[hi_idx - 1]) if hi_idx > 0 else 0.0), float(vals[hi_idx])
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if feas(mid):
            hi = mid
        else:
            lo = mid
    return DistanceEstimate(hi, err + 1e-10)


def skorokhod_d(x, y, *, mode="exact", grid_step=DEFAULT_GRID_STEP, tol=DEFAULT_TOL):
    """``inf over lambda of max(||lambda - 1||, ||x - y o lambda||)``."""
    return skorokhod_distance(x, y, "d", mode=mode, grid_step=grid_step, tol=tol).value


def skorokhod_d_circ(x, y, *, mode="exact", grid_step=DEFAULT_GRID_STEP, tol=DEFAULT_TOL):
    """``inf over lambda of max(||lambda||°, ||x - y o lambda||)``."""
    return skorokhod_distance(x, y, "dcirc", mode=mode, grid_step=grid_step, tol=tol).value


def skorokhod_witness(x, y, eta, kind="d", tol=DEFAULT_TOL):
    """A time change whose cost is within ``eta`` of the distance (step paths only)."""
    eta = check_real(eta, "eta", low=0.0, low_open=True)
    target = skorokhod_distance(x, y, kind, mode="exact", tol=tol).value + eta
    X, Y, _ = _steps_pair(x, y, "exact", 0.0)
    T = float(X.A[-1])
    q = Y.v.size - 1
    if q == 0:
        return TimeChange.identity(T)
    gaps = np.diff(np.union1d(X.A, Y.A))
    gap = min(eta, float(gaps.min())) / (8.0 * (q + 1))
    for _ in range(6):
        al = _Aligner(X, Y, target, kind, tol, gap=gap)
        if al.feasible():
            return TimeChange(_backtrack(al, X, Y))
        gap /= 16.0
    raise ModeError("could not separate the jump positions; try a larger eta")


def _pick(intervals):
    a, b = intervals[0]
    return 0.5 * (a + b)


def _backtrack(al, X, Y):
    S, A, tol = al.S, X.A, al.tol
    i, j = X.v.size - 1, Y.v.size - 1
    s = _pick(al.end_ok(S[i, j]))
    knots = [(float(Y.A[-1]), float(Y.A[-1]))]
    while j > 0:
        g_lo, g_hi = al.gap_bounds(j)
        # stay on the same y-jump while moving back through x-pieces
        if i >= 1 and _clip(S[i - 1, j], s - tol, s + tol):
            i -= 1
            continue
        knots.append((s, float(Y.A[j])))
        back = _clip(S[i, j - 1], s - g_hi, s - g_lo)
        if back:
            s, j = _pick(back), j - 1
            continue
        back = _clip(S[i - 1, j - 1], s - g_hi, s - g_lo) if i >= 1 else []
        if not back:
            raise ModeError("internal alignment backtrack failed")
        s, i, j = _pick(back), i - 1, j - 1
    knots.append((0.0, 0.0))
    return sorted(knots)


# ---------------------------------------------------------------------------
# D[0, inf)


class ExtendedPath:
    """A path on ``[0, T]`` extended beyond ``T`` by its terminal value."""

    __slots__ = ("path",)

    def __init__(self, path):
        if not isinstance(path, CadlagPath):
            raise DomainError("ExtendedPath wraps a CadlagPath")
        if path.horizon < 1.0:
            raise DomainError("the horizon of an extended path must be at least 1")
        object.__setattr__(self, "path", path)

    def __setattr__(self, name, value):
        raise AttributeError("ExtendedPath is immutable")

    @property
    def horizon(self):
        return self.path.horizon

    def extend(self, horizon):
        """Same element of D[0, inf) stored on a longer window."""
        p = self.path
        if horizon <= p.horizon:
            return self
        br, st, en = list(p.breaks), list(p.starts), list(p.ends)
        br.append(p.horizon)
        st.append(p.terminal)
        en.append(p.terminal)
        return ExtendedPath(CadlagPath(br, st, en, p.terminal, horizon))


def restrict_path(x, t):
    """Restriction to ``[0, t]`` with terminal value ``x(t)``."""
    p = x.path if isinstance(x, ExtendedPath) else x
    t = check_real(t, "t", low=0.0, low_open=True, high=p.horizon)
    if t == p.horizon:
        return p
    q = p.refine([t])
    keep = q.breaks < t
    idx = int(np.searchsorted(q.breaks, t))
    return CadlagPath(q.breaks[keep], q.starts[keep], q.ends[keep], float(q.starts[idx]), t)


def _taper(x, i, grid_step):
    p = x.path if isinstance(x, ExtendedPath) else x
    if i > p.horizon:
        raise DomainError(f"taper index {i} exceeds the horizon {p.horizon}")
    q = restrict_path(p, float(i)).refine([i - 1.0]) if i > 1 else restrict_path(p, float(i))
    kn = q.knots
    br, st, en = [], [], []
    err = 0.0
    for k in range(q.n_segments):
        a, b = float(kn[k]), float(kn[k + 1])
        s0, e0 = float(q.starts[k]), float(q.ends[k])
        if b <= i - 1.0:
            br.append(a)
            st.append(s0)
            en.append(e0)
        elif s0 == e0:
            br.append(a)
            st.append((i - a) * s0)
            en.append((i - b) * s0)
        else:
            # the product of two affine maps is quadratic; interpolate on a grid
            cells = max(1, math.ceil((b - a) / grid_step - 1e-9))
            ts = np.linspace(a, b, cells + 1)
            f = (i - ts) * (s0 + (e0 - s0) * (ts - a) / (b - a))
            br.extend(ts[:-1].tolist())
            st.extend(f[:-1].tolist())
            en.extend(f[1:].tolist())
            beta = (e0 - s0) / (b - a)
            err = max(err, abs(beta) * ((b - a) / cells) ** 2 / 4.0)
    return CadlagPath(br, st, en, 0.0, float(i)), err


def psi_taper(x, i, grid_step=DEFAULT_GRID_STEP):
    """``x`` on ``[0, i-1]`` and ``(i - t) x(t)`` on ``(i-1, i]``, as a path on ``[0, i]``."""
    i = check_int(i, "i", low=1)
    return _taper(x, i, grid_step)[0]


def d_infinity(x, y, terms=20, grid_step=DEFAULT_GRID_STEP):
    """Truncated ``sum_i 2^-i min(1, d_i(psi_i x, psi_i y))`` with its error bound.

    The bound adds the neglected tail ``2^-terms`` to the weighted
    discretization errors of the inner grid computations.
    """
    terms = check_int(terms, "terms", low=1)
    x = x if isinstance(x, ExtendedPath) else ExtendedPath(x)
    y = y if isinstance(y, ExtendedPath) else ExtendedPath(y)
    x, y = x.extend(terms), y.extend(terms)
    parts, errs = [], []
    for i in range(1, terms + 1):
        px, ex = _taper(x, i, grid_step)
        py, ey = _taper(y, i, grid_step)
        if px == py:
            parts.append(0.0)
            errs.append(0.0)
            continue
        est = skorokhod_distance(px, py, "d", mode="grid", grid_step=grid_step)
        w = 2.0 ** -i
        parts.append(w * min(1.0, est.value))
        errs.append(w * (est.error_bound + ex + ey))
    return math.fsum(parts), math.fsum(errs) + 2.0 ** -terms


# ---------------------------------------------------------------------------
# Prokhorov distance


class DiscreteMeasure:
    """Probability weights on labelled atoms of a finite metric space."""

    __slots__ = ("atoms", "weights", "dist")

    def __init__(self, atoms, weights, dist, atol=1e-12):
        atoms = tuple(str(a) for a in atoms)
        w = check_finite_array(weights, "weights")
        d = check_finite_array(dist, "dist", ndim=2)
        n = len(atoms)
        if n == 0 or w.size != n or d.shape != (n, n):
            raise DomainError("atoms, weights and dist have inconsistent sizes")
        if len(set(atoms)) != n:
            raise DomainError("atom labels must be distinct")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > atol:
            raise DomainError("weights must be nonnegative and sum to 1")
        if np.any(d < 0) or np.any(np.diag(d) != 0) or not np.array_equal(d, d.T):
            raise DomainError("dist must be symmetric, nonnegative, with zero diagonal")
        if n > 1 and np.any(d[~np.eye(n, dtype=bool)] == 0):
            raise DomainError("distinct atoms must be at positive distance")
        if n <= 400:
            via = d[:, :, None] + d[None, :, :]
            if np.any(d[:, None, :] > via + 1e-12 * (1 + d.max())):
                raise DomainError("dist violates the triangle inequality")
        for name, val in (("atoms", atoms), ("weights", w), ("dist", d)):
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, name, val)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    @classmethod
    def on_line(cls, points, weights):
        """Measure on real points with the usual distance; labels are the points."""
        pts = check_finite_array(points, "points")
        return cls([repr(float(p)) for p in pts], weights, np.abs(pts[:, None] - pts[None, :]))


def _thresholds(d):
    return np.unique(d)


def _gap_exact(p, q, adj):
    """``max_A max(P(A) - Q(A^eps), Q(A) - P(A^eps))`` by subset enumeration."""
    n = p.size
    size = 1 << n
    nb = (adj.astype(np.int64) * (1 << np.arange(n, dtype=np.int64))[None, :]).sum(axis=1)
    ext = np.zeros(size, dtype=np.int64)
    pa = np.zeros(size)
    qa = np.zeros(size)
    for b in range(n):
        lo, hi = 1 << b, 1 << (b + 1)
        ext[lo:hi] = ext[:lo] | nb[b]
        pa[lo:hi] = pa[:lo] + p[b]
        qa[lo:hi] = qa[:lo] + q[b]
    return float(max(np.max(pa - qa[ext]), np.max(qa - pa[ext]), 0.0))


def _gap_flow(p, q, adj):
    """One minus the maximal coupling mass supported on ``adj``."""
    import networkx as nx

    n = p.size
    g = nx.DiGraph()
    for a in range(n):
        if p[a] > 0:
            g.add_edge("s", ("p", a), capacity=float(p[a]))
        if q[a] > 0:
            g.add_edge(("q", a), "t", capacity=float(q[a]))
    for a, b in zip(*np.nonzero(adj)):
        if p[a] > 0 and q[b] > 0:
            g.add_edge(("p", int(a)), ("q", int(b)))
    if "s" not in g or "t" not in g:
        return 1.0
    flow = nx.maximum_flow_value(g, "s", "t")
    return max(0.0, 1.0 - flow)


def prokhorov_distance(P, Q, *, flow=False):
    """Prokhorov distance between two measures on the same finite metric space.

    ``A^eps`` is the open neighbourhood ``{x: rho(x, A) < eps}``.  For eps in
    ``(D_k, D_{k+1}]`` between consecutive distance values, the neighbourhood
    relation is ``rho <= D_k`` and the worst-case gap ``g_k`` is constant.  The
    answer is ``max(D_k, g_k)`` for the first ``k`` with ``g_k <= D_{k+1}``.
    Exact mode enumerates all subsets (at most 15 atoms).  ``flow=True``
    computes ``g_k`` from a maximum flow instead, for any number of atoms.
    """
    if P.atoms != Q.atoms or not np.array_equal(P.dist, Q.dist):
        raise DomainError("measures must share atoms and distance matrix")
    n = len(P.atoms)
    if not flow and n > EXACT_PROKHOROV_ATOMS:
        raise CapacityError(f"{n} atoms exceed the exact limit of {EXACT_PROKHOROV_ATOMS}; "
                            "enable flow mode")
    gap = _gap_flow if flow else _gap_exact
    D = np.append(_thresholds(P.dist), math.inf)
    cache = {}

    def g(k):
        if k not in cache:
            cache[k] = gap(P.weights, Q.weights, P.dist <= D[k])
        return cache[k]

    lo, hi = 0, D.size - 2
    while lo < hi:
        mid = (lo + hi) // 2
        if g(mid) <= D[mid + 1]:
            hi = mid
        else:
            lo = mid + 1
    return float(min(1.0, max(D[lo], g(lo))))
