"""Seeded pre-limit processes and exact path functionals."""
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_finite_array, check_int, check_real
from .errors import DomainError
from .paths import CadlagPath


@dataclass(frozen=True)
class IncrementLaw:
    """Law of the walk increments: mean zero, finite variance."""

    kind: str = "rademacher"
    values: tuple = ()
    probs: tuple = ()
    sigma: float = field(init=False)

    def __post_init__(self):
        if self.kind == "rademacher":
            sigma = 1.0
        elif self.kind == "centered-uniform":
            sigma = 1.0 / math.sqrt(3.0)   # uniform on [-1, 1]
        elif self.kind == "finite-support":
            v = check_finite_array(self.values, "values")
            p = check_finite_array(self.probs, "probs")
            if v.size == 0 or v.size != p.size or np.any(p < 0) or abs(math.fsum(p) - 1) > 1e-12:
                raise DomainError("finite-support law needs matching values and probabilities")
            mean = math.fsum(v * p)
            if abs(mean) > 1e-12:
                raise DomainError(f"increments must have mean 0, got {mean!r}")
            sigma = math.sqrt(math.fsum(v * v * p))
            if sigma == 0:
                raise DomainError("increments must have positive variance")
            object.__setattr__(self, "values", tuple(float(a) for a in v))
            object.__setattr__(self, "probs", tuple(float(a) for a in p))
        else:
            raise DomainError(f"unknown increment law {self.kind!r}")
        object.__setattr__(self, "sigma", sigma)

    def sample(self, rng, size):
        if self.kind == "rademacher":
            return 2.0 * rng.integers(0, 2, size=size) - 1.0
        if self.kind == "centered-uniform":
            return rng.uniform(-1.0, 1.0, size=size)
        return rng.choice(np.asarray(self.values), size=size, p=np.asarray(self.probs))

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "finite-support":
            d.update(values=list(self.values), probs=list(self.probs))
        return d


@dataclass(frozen=True)
class SeededStream:
    """Independent random stream for replica ``stream_id`` under ``seed``."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        check_int(self.seed, "seed", low=0, high=2**64 - 1)
        check_int(self.stream_id, "stream_id", low=0)

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def walk_path_from_sums(S, n, sigma, variant):
    """Donsker path from the partial sums ``S_0, ..., S_n``."""
    scale = sigma * math.sqrt(n)
    vals = np.asarray(S, dtype=float) / scale
    times = np.arange(n + 1) / n
    times[-1] = 1.0
    if variant == "D":
        return CadlagPath(times[:-1], vals[:-1], None, vals[-1])
    if variant == "C":
        return CadlagPath.linear(times, vals)
    raise DomainError(f"variant must be 'C' or 'D', got {variant!r}")


def donsker_path(n, law, stream, variant="D", increments=None):
    """Scaled partial-sum path: linear interpolation (C) or step (D).

    ``increments`` replaces the random draws, for reproducing hand examples.
    """
    n = check_int(n, "n", low=1)
    if increments is None:
        xi = law.sample(stream.generator(), n)
    else:
        xi = check_finite_array(increments, "increments")
        if xi.size != n:
            raise DomainError("need exactly n increments")
    S = np.concatenate([[0.0], np.cumsum(xi)])
    return walk_path_from_sums(S, n, law.sigma, variant)


def poisson_count(n, alpha, stream):
    """Number of successes among ``n`` trials with probability ``alpha/n``."""
    return int(stream.generator().binomial(n, alpha / n))


def poisson_path(n, alpha, stream, indicators=None):
    """Count path ``t -> sum_{i <= nt} xi_i`` with ``P(xi_i = 1) = alpha/n``.

    The success positions are drawn as a uniform subset of the binomial size,
    which has the same law as independent trials.
    """
    n = check_int(n, "n", low=1)
    alpha = check_real(alpha, "alpha", low=0.0, low_open=True)
    if alpha >= n:
        raise DomainError("need alpha < n")
    if indicators is None:
        rng = stream.generator()
        k = int(rng.binomial(n, alpha / n))
        idx = np.sort(rng.choice(n, size=k, replace=False)) + 1
    else:
        ind = np.asarray(indicators)
        if ind.size != n or not np.all((ind == 0) | (ind == 1)):
            raise DomainError("indicators must be n zeros and ones")
        idx = np.flatnonzero(ind) + 1
    times = idx / n
    inner = times[times < 1.0]
    breaks = np.concatenate([[0.0], inner])
    values = np.arange(inner.size + 1, dtype=float)
    return CadlagPath(breaks, values, None, float(idx.size))


# ---------------------------------------------------------------------------
# distribution functions on [0, 1]


class PiecewiseLinearCDF:
    """Distribution function on [0, 1] that is affine between jumps."""

    def __init__(self, path):
        if not isinstance(path, CadlagPath) or path.horizon != 1.0:
            raise DomainError("a CDF is given by a path on [0, 1]")
        s, e = path.starts, path.ends
        nxt = np.append(s[1:], path.terminal)
        if (np.any(s < 0) or np.any(e < s) or np.any(nxt < e) or path.terminal != 1.0):
            raise DomainError("CDF path must be nondecreasing, nonnegative, with F(1) = 1")
        self.path = path
        kn = path.knots
        # vertices of the graph, jumps drawn as vertical pieces
        t = np.empty(2 * path.n_segments + 1)
        F = np.empty_like(t)
        t[0::2][:-1], F[0::2][:-1] = kn[:-1], s
        t[1::2], F[1::2] = kn[1:], e
        t[-1], F[-1] = 1.0, 1.0
        self._t, self._F = t, F

    @classmethod
    def uniform(cls):
        return cls(CadlagPath.linear([0.0, 1.0], [0.0, 1.0]))

    @classmethod
    def point_mass(cls, a):
        a = check_real(a, "a", low=0.0, high=1.0)
        return cls(CadlagPath.indicator(a))

    @classmethod
    def from_knots(cls, times, values):
        return cls(CadlagPath.linear(times, values))

    def __call__(self, t):
        return self.path.values_at(t)

    def quantile(self, u):
        """``inf{t : u <= F(t)}``, vectorized."""
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self._F, u, side="left")
        idx = np.clip(idx, 1, self._F.size - 1)
        f0, f1 = self._F[idx - 1], self._F[idx]
        t0, t1 = self._t[idx - 1], self._t[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(f1 > f0, (u - f0) / (f1 - f0), 1.0)
        out = np.where(u <= self._F[0], self._t[0], t0 + r * (t1 - t0))
        return out

    def to_dict(self):
        return {"kind": "piecewise-linear", "breaks": self.path.breaks.tolist(),
                "starts": self.path.starts.tolist(), "ends": self.path.ends.tolist()}


class PowerCDF:
    """``F(t) = t**p`` on [0, 1]."""

    def __init__(self, p):
        self.p = check_real(p, "p", low=0.0, low_open=True)

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** self.p

    def quantile(self, u):
        return np.asarray(u, dtype=float) ** (1.0 / self.p)

    def to_dict(self):
        return {"kind": "power", "p": self.p}


def quantile_transform(u, cdf):
    """Generalized inverse ``inf{t : u <= F(t)}`` for ``u`` in (0, 1]."""
    u = check_real(u, "u", low=0.0, low_open=True, high=1.0)
    return float(cdf.quantile(u))


def empirical_path(n, cdf, stream, samples=None):
    """``sqrt(n) (F_n - F)`` for a sample of size ``n`` from ``cdf``."""
    n = check_int(n, "n", low=1)
    if not isinstance(cdf, PiecewiseLinearCDF):
        raise DomainError("empirical paths need a piecewise-linear CDF")
    if samples is None:
        u = 1.0 - stream.generator().random(n)   # uniform on (0, 1]
        x = cdf.quantile(u)
    else:
        x = check_finite_array(samples, "samples")
        if x.size != n or np.any((x < 0) | (x > 1)):
            raise DomainError("need n samples in [0, 1]")
    x = np.sort(x)
    inner, counts = np.unique(x[x < 1.0], return_counts=True)
    at0 = float(counts[0]) if inner.size and inner[0] == 0.0 else 0.0
    brk = inner[inner > 0]
    cum = np.cumsum(counts[inner > 0]) + at0
    Fn = CadlagPath(np.concatenate([[0.0], brk]), np.concatenate([[at0], cum]) / n, None, 1.0)
    return (Fn - cdf.path) * math.sqrt(n)


def bridge_transform(x):
    """``t -> x(t) - (t/T) x(T)``."""
    line = CadlagPath.linear([0.0, x.horizon], [0.0, x.terminal])
    return x - line


# ---------------------------------------------------------------------------
# functionals


def _segment_positive_time(s, e, length):
    if s > 0 and e > 0:
        return length
    if s <= 0 and e <= 0:
        return 0.0
    return length * max(s, e) / abs(e - s)


def last_zero(x):
    """``(sup{t : x(t) = 0}, found)``; ``(0.0, False)`` when the path has no zero."""
    if x.terminal == 0.0:
        return x.horizon, True
    kn = x.knots
    for k in range(x.n_segments - 1, -1, -1):
        s, e = float(x.starts[k]), float(x.ends[k])
        if s == 0.0 and e == 0.0:
            return float(kn[k + 1]), True
        if s * e < 0:
            return float(kn[k] + (kn[k + 1] - kn[k]) * s / (s - e)), True
        if s == 0.0:
            return float(kn[k]), True
    return 0.0, False


FUNCTIONALS = ("sup", "inf", "sup_abs", "range", "last_zero", "occupation_positive",
               "integral", "ks_scaled")


def apply_functional(x, f, n=None):
    """Exact value of a path functional; ``ks_scaled`` needs ``n``."""
    if f == "sup":
        return x.sup()
    if f == "inf":
        return x.inf()
    if f == "sup_abs":
        return max(abs(x.sup()), abs(x.inf()))
    if f == "range":
        return x.sup() - x.inf()
    if f == "last_zero":
        return last_zero(x)[0]
    if f == "occupation_positive":
        lengths = np.diff(x.knots)
        return math.fsum(_segment_positive_time(float(s), float(e), float(h))
                         for s, e, h in zip(x.starts, x.ends, lengths))
    if f == "integral":
        lengths = np.diff(x.knots)
        return math.fsum(0.5 * (x.starts + x.ends) * lengths)
    if f == "ks_scaled":
        n = check_int(n, "n", low=1)
        return math.sqrt(n) * max(abs(x.sup()), abs(x.inf()))
    raise DomainError(f"unknown functional {f!r}; choose from {FUNCTIONALS}")


def walk_functionals(S, f, variant="D"):
    """Vectorized functionals of scaled walk paths.

    ``S`` holds one row ``(S_0, ..., S_n) / (sigma sqrt n)`` per replica.
    Agrees with :func:`apply_functional` on :func:`walk_path_from_sums`.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[1] - 1
    if f == "sup":
        return S.max(axis=1)
    if f == "inf":
        return S.min(axis=1)
    if f == "sup_abs":
        return np.abs(S).max(axis=1)
    if f == "range":
        return S.max(axis=1) - S.min(axis=1)
    a, b = S[:, :-1], S[:, 1:]
    if f == "occupation_positive":
        if variant == "D":
            return (a > 0).sum(axis=1) / n
        with np.errstate(invalid="ignore", divide="ignore"):
            mixed = np.maximum(a, b) / np.abs(b - a)
        part = np.where((a > 0) & (b > 0), 1.0, np.where((a <= 0) & (b <= 0), 0.0, mixed))
        return part.sum(axis=1) / n
    if f == "integral":
        if variant == "D":
            return a.sum(axis=1) / n
        return (0.5 * (a + b)).sum(axis=1) / n
    if f == "last_zero":
        k = np.arange(n)
        if variant == "D":
            zero_seg = a == 0
            t = np.where(zero_seg, (k + 1) / n, -1.0)
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                cross = np.where(a * b < 0, (k + a / (a - b)) / n, -1.0)
            t = np.maximum(cross, np.where(a == 0, k / n, -1.0))
        t = t.max(axis=1)
        return np.where(S[:, -1] == 0, 1.0, np.maximum(t, 0.0))
    raise DomainError(f"functional {f!r} has no vectorized walk form")
