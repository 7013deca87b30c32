"""Cadlag paths with finitely many pieces, and their moduli.

A path on ``[0, T]`` is stored as a list of segments ``[b_k, b_{k+1})``.  On
each segment the path is affine, running from ``starts[k]`` at ``b_k`` to the
left limit ``ends[k]`` at ``b_{k+1}``.  A segment with ``starts[k] == ends[k]``
is constant.  The value at the horizon is held separately in ``terminal``.
"""
import bisect
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._validation import check_delta, check_finite_array, check_real
from .errors import DomainError, ModeError

DEFAULT_TOL = 1e-12
DEFAULT_GRID_STEP = 1e-3


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class CadlagPath:
    """Right-continuous path with left limits, built from affine pieces.

    Adjacent constant pieces with equal value are merged on construction.
    """

    __slots__ = ("breaks", "starts", "ends", "terminal", "horizon")

    def __init__(self, breaks, starts, ends=None, terminal=None, horizon=1.0):
        horizon = check_real(horizon, "horizon", low=0.0, low_open=True)
        b = check_finite_array(breaks, "breaks")
        s = check_finite_array(starts, "starts")
        e = s.copy() if ends is None else check_finite_array(ends, "ends")
        if b.size == 0 or b.size != s.size or b.size != e.size:
            raise DomainError("breaks, starts and ends must be nonempty and of equal length")
        if b[0] != 0.0:
            raise DomainError("the first break must be 0")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breaks must be strictly increasing")
        if b[-1] >= horizon:
            raise DomainError("every break must lie below the horizon")
        term = float(e[-1]) if terminal is None else check_real(terminal, "terminal")

        # merge equal adjacent constant pieces
        const = s == e
        keep = np.ones(b.size, dtype=bool)
        keep[1:] = ~(const[1:] & const[:-1] & (s[1:] == s[:-1]))
        object.__setattr__(self, "breaks", _frozen(b[keep]))
        object.__setattr__(self, "starts", _frozen(s[keep]))
        object.__setattr__(self, "ends", _frozen(e[keep]))
        object.__setattr__(self, "terminal", term)
        object.__setattr__(self, "horizon", horizon)

    def __setattr__(self, name, value):
        raise AttributeError("CadlagPath is immutable")

    # constructors

    @classmethod
    def step(cls, breaks, values, terminal=None, horizon=1.0):
        return cls(breaks, values, None, terminal, horizon)

    @classmethod
    def linear(cls, times, values):
        """Continuous piecewise-linear path through the knots ``(times, values)``.

        ``times`` starts at 0 and its last entry is the horizon.
        """
        t = check_finite_array(times, "times")
        v = check_finite_array(values, "values")
        if t.size < 2 or t.size != v.size:
            raise DomainError("need at least two knots of matching length")
        return cls(t[:-1], v[:-1], v[1:], v[-1], t[-1])

    @classmethod
    def constant(cls, value=0.0, horizon=1.0):
        return cls([0.0], [value], None, value, horizon)

    @classmethod
    def indicator(cls, a, b=None, height=1.0, horizon=1.0):
        """``height`` times the indicator of ``[a, b)``, or of ``[a, horizon]`` if ``b`` is None."""
        a = check_real(a, "a", low=0.0, high=horizon)
        if b is not None:
            b = check_real(b, "b", low=a, low_open=True, high=horizon)
        times, vals = [0.0], [0.0]
        if a == 0.0:
            vals[0] = height
        else:
            times.append(a)
            vals.append(height)
        term = height
        if b is not None:
            term = 0.0
            if b < horizon:
                times.append(b)
                vals.append(0.0)
        if a == horizon:
            times, vals = [0.0], [0.0]
        return cls(times, vals, None, term, horizon)

    # basic views

    @property
    def n_segments(self):
        return int(self.breaks.size)

    @property
    def is_step(self):
        return bool(np.all(self.starts == self.ends))

    @property
    def knots(self):
        """Segment boundaries including the horizon."""
        return np.append(self.breaks, self.horizon)

    def __call__(self, t, side="right"):
        return evaluate(self, t, side)

    def values_at(self, ts):
        """Vectorized right evaluation on an array of times."""
        ts = np.asarray(ts, dtype=float)
        if np.any((ts < 0) | (ts > self.horizon)):
            raise DomainError("times must lie in [0, horizon]")
        k = np.searchsorted(self.breaks, ts, side="right") - 1
        k = np.clip(k, 0, self.n_segments - 1)
        kn = self.knots
        frac = (ts - kn[k]) / (kn[k + 1] - kn[k])
        out = self.starts[k] + (self.ends[k] - self.starts[k]) * frac
        return np.where(ts == self.horizon, self.terminal, out)

    def sup(self):
        return float(max(self.starts.max(), self.ends.max(), self.terminal))

    def inf(self):
        return float(min(self.starts.min(), self.ends.min(), self.terminal))

    def jumps(self):
        """Times in ``(0, T]`` where the path jumps, with signed sizes."""
        times = np.append(self.breaks[1:], self.horizon)
        sizes = np.append(self.starts[1:], self.terminal) - self.ends
        mask = sizes != 0
        return times[mask], sizes[mask]

    def refine(self, times):
        """Same function re-expressed on a breakpoint set containing ``times``."""
        extra = np.asarray(times, dtype=float)
        extra = extra[(extra > 0) & (extra < self.horizon)]
        nb = np.union1d(self.breaks, extra)
        if nb.size == self.breaks.size:
            return self
        kn = self.knots
        k = np.searchsorted(self.breaks, nb, side="right") - 1
        nxt = np.append(nb[1:], self.horizon)
        s0, e0 = self.starts[k], self.ends[k]
        length = kn[k + 1] - kn[k]
        slope_num = e0 - s0
        starts = np.where(nb == kn[k], s0, s0 + slope_num * ((nb - kn[k]) / length))
        ends = np.where(nxt == kn[k + 1], e0, s0 + slope_num * ((nxt - kn[k]) / length))
        out = object.__new__(CadlagPath)
        for name, val in (("breaks", _frozen(nb)), ("starts", _frozen(starts)),
                          ("ends", _frozen(ends)), ("terminal", self.terminal),
                          ("horizon", self.horizon)):
            object.__setattr__(out, name, val)
        return out

    # arithmetic

    def _combine(self, other, op):
        if isinstance(other, CadlagPath):
            if other.horizon != self.horizon:
                raise DomainError("paths live on different horizons")
            x = self.refine(other.breaks)
            y = other.refine(self.breaks)
            return CadlagPath(x.breaks, op(x.starts, y.starts), op(x.ends, y.ends),
                              float(op(x.terminal, y.terminal)), self.horizon)
        c = check_real(other, "scalar")
        return CadlagPath(self.breaks, op(self.starts, c), op(self.ends, c),
                          float(op(self.terminal, c)), self.horizon)

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return CadlagPath(self.breaks, -self.starts, -self.ends, -self.terminal, self.horizon)

    def __mul__(self, c):
        c = check_real(c, "scalar")
        return CadlagPath(self.breaks, self.starts * c, self.ends * c, self.terminal * c, self.horizon)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CadlagPath):
            return NotImplemented
        return (self.horizon == other.horizon and self.terminal == other.terminal
                and np.array_equal(self.breaks, other.breaks)
                and np.array_equal(self.starts, other.starts)
                and np.array_equal(self.ends, other.ends))

    __hash__ = None

    def __repr__(self):
        kind = "step" if self.is_step else "pl"
        return (f"CadlagPath({kind}, segments={self.n_segments}, "
                f"terminal={self.terminal!r}, horizon={self.horizon!r})")


def evaluate(path, t, side="right"):
    """``x(t)`` for ``side='right'`` or the left limit ``x(t-)`` for ``side='left'``."""
    t = check_real(t, "t", low=0.0, high=path.horizon)
    kn = path.knots
    if side == "right":
        if t == path.horizon:
            return path.terminal
        k = int(np.searchsorted(path.breaks, t, side="right")) - 1
    elif side == "left":
        if t == 0.0:
            raise DomainError("the left limit is undefined at t=0")
        k = int(np.searchsorted(path.breaks, t, side="left")) - 1
        if t == kn[k + 1]:
            return float(path.ends[k])
    else:
        raise DomainError(f"side must be 'right' or 'left', got {side!r}")
    s, e = path.starts[k], path.ends[k]
    if s == e or t == kn[k]:
        return float(s)
    return float(s + (e - s) * ((t - kn[k]) / (kn[k + 1] - kn[k])))


def uniform_distance(x, y):
    """``sup_t |x(t) - y(t)|``, exact on the merged breakpoint grid."""
    diff = x - y
    return float(max(np.abs(diff.starts).max(), np.abs(diff.ends).max(), abs(diff.terminal)))


def sup_norm(x):
    return uniform_distance(x, CadlagPath.constant(0.0, x.horizon))


def largest_jump(x):
    _, sizes = x.jumps()
    return float(np.abs(sizes).max()) if sizes.size else 0.0


def oscillation_on_interval(x, a, b, right_open=True):
    """``sup - inf`` of ``x`` over ``[a, b)`` or ``[a, b]``."""
    a = check_real(a, "a", low=0.0, high=x.horizon)
    b = check_real(b, "b", low=0.0, high=x.horizon)
    if a >= b:
        raise DomainError("need a < b")
    kn = x.knots
    lo_k = int(np.searchsorted(x.breaks, a, side="right")) - 1
    hi_k = int(np.searchsorted(x.breaks, b, side="left")) - 1
    vals = [evaluate(x, a)]
    for k in range(lo_k, hi_k + 1):
        s0, e0 = x.starts[k], x.ends[k]
        for t in (max(a, kn[k]), min(b, kn[k + 1])):
            if s0 == e0:
                vals.append(float(s0))
            elif t == kn[k + 1]:
                vals.append(float(e0))
            else:
                vals.append(float(s0 + (e0 - s0) * ((t - kn[k]) / (kn[k + 1] - kn[k]))))
    if not right_open:
        vals.append(evaluate(x, b))
    return max(vals) - min(vals)


# ---------------------------------------------------------------------------
# moduli


@dataclass(frozen=True)
class Modulus:
    delta: float
    value: float
    kind: str
    error_bound: float = 0.0


def discretize(x, grid_step=DEFAULT_GRID_STEP):
    """Step approximation of ``x`` and its uniform error.

    Each non-constant segment is cut into cells of length at most
    ``grid_step`` and replaced by its value at the cell midpoint.  Jumps and
    constant pieces are kept as they are.
    """
    grid_step = check_real(grid_step, "grid_step", low=0.0, low_open=True)
    if x.is_step:
        return x, 0.0
    kn = x.knots
    br, vals = [], []
    err = 0.0
    for k in range(x.n_segments):
        s0, e0 = float(x.starts[k]), float(x.ends[k])
        a, b = float(kn[k]), float(kn[k + 1])
        if s0 == e0:
            br.append(a)
            vals.append(s0)
            continue
        cells = max(1, math.ceil((b - a) / grid_step - 1e-9))
        edges = np.linspace(a, b, cells + 1)
        edges[-1] = b
        mids = 0.5 * (edges[:-1] + edges[1:])
        br.extend(edges[:-1].tolist())
        vals.extend((s0 + (e0 - s0) * ((mids - a) / (b - a))).tolist())
        err = max(err, abs(e0 - s0) / cells / 2.0)
    return CadlagPath(br, vals, None, x.terminal, x.horizon), err


def _step_data(x):
    return x.knots.tolist(), x.starts.tolist()


def modulus_w(x, delta):
    """``sup_{|s-t| <= delta} |x(s) - x(t)|``, exact for any piecewise-affine path."""
    delta = check_delta(delta, closed_right=True)
    kn = x.knots
    m = x.n_segments
    if x.is_step:
        vals = np.append(x.starts, x.terminal)
        best = 0.0
        for i in range(m):
            kmax = int(np.searchsorted(kn, kn[i + 1] + delta, side="left")) - 1
            if kmax >= i + 1:
                best = max(best, float(np.abs(vals[i + 1:kmax + 1] - vals[i]).max()))
        return best
    return _modulus_w_affine(x, delta)


def _clip_halfplane(poly, delta):
    """Clip a polygon in the (s, t) plane to ``t - s <= delta``."""
    out = []
    n = len(poly)
    for idx in range(n):
        p, q = poly[idx], poly[(idx + 1) % n]
        fp, fq = p[1] - p[0] - delta, q[1] - q[0] - delta
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            r = fp / (fp - fq)
            out.append((p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])))
    return out


def _modulus_w_affine(x, delta):
    kn = x.knots.tolist()
    st, en = x.starts.tolist(), x.ends.tolist()
    m = len(st)
    T = x.horizon

    def f(k, t):
        if k == m:
            return x.terminal
        if t == kn[k + 1]:
            return en[k]
        return st[k] + (en[k] - st[k]) * ((t - kn[k]) / (kn[k + 1] - kn[k]))

    best = 0.0
    for k in range(m):
        length = kn[k + 1] - kn[k]
        best = max(best, abs(en[k] - st[k]) * min(delta, length) / length)
        for l in range(k + 1, m + 1):
            if kn[l] - kn[k + 1] >= delta:
                break
            t_lo, t_hi = (kn[l], kn[l + 1]) if l < m else (T, T)
            rect = [(kn[k], t_lo), (kn[k + 1], t_lo), (kn[k + 1], t_hi), (kn[k], t_hi)]
            for s, t in _clip_halfplane(rect, delta):
                best = max(best, abs(f(k, s) - f(l, t)))
    return best


def _reach(v, eps, strict, tol):
    """For each piece k, the first index J > k such that v[k..J] has range
    exceeding ``eps`` (or ``len(v)``)."""
    m = len(v)
    r = [m] * m
    mx, mn = deque(), deque()
    J = 0
    for k in range(m):
        if J <= k:
            J = k
            mx.clear()
            mn.clear()
        while J < m:
            hi = max(v[mx[0]], v[J]) if mx else v[J]
            lo = min(v[mn[0]], v[J]) if mn else v[J]
            ok = (hi - lo < eps) if strict else (hi - lo <= eps + tol)
            if not ok and J > k:
                break
            while mx and v[mx[-1]] <= v[J]:
                mx.pop()
            mx.append(J)
            while mn and v[mn[-1]] >= v[J]:
                mn.pop()
            mn.append(J)
            J += 1
        r[k] = J
        if mx and mx[0] == k:
            mx.popleft()
        if mn and mn[0] == k:
            mn.popleft()
    return r


def _wprime_feasible(kn, v, delta, eps, strict=False, tol=DEFAULT_TOL):
    """Is there a delta-sparse partition with every ``[t_{i-1}, t_i)`` oscillation
    at most ``eps`` (below ``eps`` when ``strict``)?

    ``e[k]`` is the earliest partition point reachable inside piece ``k``;
    pieces reachable at their left end are tracked with a difference array.
    """
    m = len(v)
    T = kn[m]
    r = _reach(v, eps, strict, tol)
    inf = math.inf
    e = [inf] * m
    e[0] = 0.0
    cover = [0] * (m + 2)
    run = 0
    for k in range(m):
        run += cover[k]
        if run > 0 and kn[k] < e[k]:
            e[k] = kn[k]
        ek = e[k]
        if ek == inf:
            continue
        rk = r[k]
        if rk == m and T - ek > delta:
            return True
        j0 = bisect.bisect_right(kn, ek + delta) - 1
        if rk < m and j0 > rk - 1:
            continue
        lo, hi = max(j0, k + 1), min(rk, m - 1)
        if lo > hi:
            continue
        cand = max(kn[lo], ek + delta)
        if cand < e[lo]:
            e[lo] = cand
        cover[lo + 1] += 1
        cover[hi + 1] -= 1
    return False


def _check_mode(x, grid_step, exact):
    if x.is_step:
        return x, 0.0
    if exact:
        raise ModeError("exact mode needs a piecewise-constant path")
    return discretize(x, grid_step)


def modulus_w_prime(x, delta, *, exact=False, grid_step=DEFAULT_GRID_STEP, tol=DEFAULT_TOL):
    """Cadlag modulus ``w'_x(delta)``.

    Exact for step paths.  Other paths are first replaced by
    :func:`discretize`; the result is then within ``2 * eta`` of the true
    value, where ``eta`` is the discretization error.  ``exact=True`` refuses
    non-step input instead.  Partition gaps must exceed ``delta + tol``, so
    gaps that equal ``delta`` up to rounding count as ties and are rejected.
    """
    delta = check_delta(delta)
    x, _ = _check_mode(x, grid_step, exact)
    kn, v = _step_data(x)
    if len(v) == 1:
        return 0.0
    arr = np.asarray(v)
    cands = np.unique(np.abs(np.subtract.outer(arr, arr)))
    lo, hi = 0, cands.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _wprime_feasible(kn, v, delta + tol, float(cands[mid]), tol=tol):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def w_prime_at_least(x, delta, eps, *, grid_step=DEFAULT_GRID_STEP, tol=DEFAULT_TOL):
    """Decide ``w'_x(delta) >= eps`` with a single feasibility pass."""
    delta = check_delta(delta)
    x, _ = _check_mode(x, grid_step, False)
    kn, v = _step_data(x)
    return not _wprime_feasible(kn, v, delta + tol, float(eps), strict=True, tol=tol)


def modulus_w_double_prime(x, delta, *, exact=False, grid_step=DEFAULT_GRID_STEP):
    """``sup min(|x(t)-x(t1)|, |x(t2)-x(t)|)`` over ``t1 <= t <= t2 <= t1 + delta``."""
    delta = check_delta(delta)
    x, _ = _check_mode(x, grid_step, exact)
    kn = x.knots
    vals = np.append(x.starts, x.terminal)
    m = x.n_segments
    best = 0.0
    for i in range(m):
        kmax = int(np.searchsorted(kn, kn[i + 1] + delta, side="left")) - 1
        if kmax < i + 2:
            continue
        w = vals[i + 1:kmax + 1]
        a = np.abs(w - vals[i])
        b = np.abs(w[None, :] - w[:, None])
        mins = np.minimum(a[:, None], b)
        mins = np.triu(mins, k=1)
        best = max(best, float(mins.max()))
    return best


_MODULI = {"w": modulus_w, "w_prime": modulus_w_prime, "w_double_prime": modulus_w_double_prime}


def modulus(x, delta, kind="w_prime", grid_step=DEFAULT_GRID_STEP):
    """Evaluate one of the three moduli and wrap it with its error bound."""
    if kind not in _MODULI:
        raise DomainError(f"unknown modulus kind {kind!r}")
    if kind == "w":
        return Modulus(float(delta), modulus_w(x, delta), kind, 0.0)
    _, eta = discretize(x, grid_step)
    return Modulus(float(delta), _MODULI[kind](x, delta, grid_step=grid_step), kind, 2.0 * eta)
