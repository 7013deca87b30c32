"""Exact combinatorics of the simple random walk.

All probabilities are :class:`fractions.Fraction` values.  The enumeration
oracle walks through all ``2**n`` sign sequences and records the joint
statistics

* ``S`` final position,
* ``m``, ``M`` minimum and maximum of ``S_0, ..., S_n`` (so ``m <= 0 <= M``),
* ``T`` the last ``k <= n`` with ``S_k = 0``,
* ``U`` the number of steps ``k >= 1`` with ``max(S_{k-1}, S_k) > 0``,
* ``V`` the same count restricted to ``k <= T``.

With this convention a step is positive when it lies on an excursion above
zero.  At even ``n`` with ``S_n = 0`` it gives the classical occupation time.
At odd ``n`` the convention is our own extension.
"""
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import check_int
from .errors import CapacityError, DomainError

MAX_ENUMERATION_STEPS = 20
STAT_FIELDS = ("S", "m", "M", "T", "U", "V")
OCCUPATION_CONVENTION = "U counts steps k>=1 with max(S_{k-1}, S_k) > 0; V restricts to k <= T"


def _as_fraction(p):
    if isinstance(p, Fraction):
        return p
    if isinstance(p, float):
        return Fraction(repr(p))
    return Fraction(p)


def walk_pmf(n, i, p=Fraction(1, 2)):
    """``P(S_n = i)`` for a walk with up-probability ``p`` (exact)."""
    n = check_int(n, "n", low=0)
    i = check_int(i, "i")
    p = _as_fraction(p)
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    if abs(i) > n or (n - i) % 2:
        return Fraction(0)
    up = (n + i) // 2
    if p == Fraction(1, 2):
        return Fraction(math.comb(n, up), 1 << n)
    return math.comb(n, up) * p ** up * (1 - p) ** (n - up)


def reflection_joint(n, i, j, l):
    """``P(i < m_n <= M_n < j, S_n = l)`` by the signed reflection sum."""
    n = check_int(n, "n", low=0)
    i, j, l = check_int(i, "i"), check_int(j, "j"), check_int(l, "l")
    if not (i < 0 < j and i < l < j):
        raise DomainError("need i < 0 < j and i < l < j")
    w = j - i
    K = n // (2 * w) + 2
    plus = sum((walk_pmf(n, 2 * k * w + l) for k in range(-K, K + 1)), Fraction(0))
    minus = sum((walk_pmf(n, 2 * k * w + 2 * j - l) for k in range(-K, K + 1)), Fraction(0))
    return plus - minus


def ballot_positive(n, i):
    """``P(S_1 >= 1, ..., S_{n-1} >= 1, S_n = i) = (i/n) p_n(i)``."""
    n = check_int(n, "n", low=1)
    i = check_int(i, "i")
    if i <= 0:
        raise DomainError("the ballot formula needs i >= 1")
    return Fraction(i, n) * walk_pmf(n, i)


def occupation_conditional(n, j):
    """``P(V_{2n} = 2j | S_{2n} = 0) = 1/(n+1)`` for ``0 <= j <= n``."""
    n = check_int(n, "n", low=0)
    j = check_int(j, "j")
    if not 0 <= j <= n:
        raise DomainError("need 0 <= j <= n")
    return Fraction(1, n + 1)


@dataclass(frozen=True)
class WalkStats:
    """Joint counts of ``(S, m, M, T, U, V)`` over all sign sequences."""

    n: int
    counts: dict
    convention: str = field(default=OCCUPATION_CONVENTION)

    @property
    def total(self):
        return sum(self.counts.values())

    def probability(self, predicate):
        """Exact probability of ``predicate(S, m, M, T, U, V)``."""
        hits = sum(c for key, c in self.counts.items() if predicate(*key))
        return Fraction(hits, 1 << self.n)

    def marginal(self, *names):
        idx = [STAT_FIELDS.index(nm) for nm in names]
        out = Counter()
        for key, c in self.counts.items():
            out[tuple(key[k] for k in idx) if len(idx) > 1 else key[idx[0]]] += c
        return dict(sorted(out.items()))


def _walk_matrix(n):
    codes = np.arange(1 << n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n)) & 1
    steps = (2 * bits - 1).astype(np.int8)
    S = np.zeros((codes.size, n + 1), dtype=np.int8)
    np.cumsum(steps, axis=1, out=S[:, 1:])
    return S


def enumerate_walks(n):
    """Exhaustive joint statistics for ``n <= 20`` steps."""
    n = check_int(n, "n", low=0)
    if n > MAX_ENUMERATION_STEPS:
        raise CapacityError(f"enumeration is limited to n <= {MAX_ENUMERATION_STEPS}")
    if n == 0:
        return WalkStats(0, {(0, 0, 0, 0, 0, 0): 1})
    S = _walk_matrix(n)
    m = S.min(axis=1)
    M = S.max(axis=1)
    zero = S == 0
    T = n - np.argmax(zero[:, ::-1], axis=1)
    pos = np.maximum(S[:, :-1], S[:, 1:]) > 0
    U = pos.sum(axis=1)
    k = np.arange(1, n + 1)
    V = (pos & (k[None, :] <= T[:, None])).sum(axis=1)
    table = np.stack([S[:, -1], m, M, T, U, V], axis=1).astype(np.int64)
    keys, cnt = np.unique(table, axis=0, return_counts=True)
    counts = {tuple(int(v) for v in key): int(c) for key, c in zip(keys, cnt)}
    return WalkStats(n, counts)


@dataclass(frozen=True)
class MaximalCheck:
    n: int
    alpha: int
    prob_max: Fraction
    etemadi_bound: Fraction
    kolmogorov_bound: Fraction

    @property
    def etemadi_holds(self):
        return self.prob_max <= self.etemadi_bound

    @property
    def kolmogorov_holds(self):
        return self.prob_max <= self.kolmogorov_bound


def _tail_abs(n, threshold):
    """``P(|S_n| >= threshold)`` for a rational threshold."""
    return sum((walk_pmf(n, i) for i in range(-n, n + 1) if abs(i) >= threshold), Fraction(0))


def maximal_inequalities(n, alpha, stats=None):
    """Exact left side and both bounds for ``P(max_k |S_k| >= alpha)``.

    The Etemadi bound is ``3 max_k P(|S_k| >= alpha/3)``; the Kolmogorov
    bound is ``n / alpha**2``.
    """
    n = check_int(n, "n", low=1)
    alpha = check_int(alpha, "alpha", low=1)
    stats = stats if stats is not None else enumerate_walks(n)
    lhs = stats.probability(lambda S, m, M, T, U, V: max(M, -m) >= alpha)
    third = Fraction(alpha, 3)
    etemadi = 3 * max(_tail_abs(k, third) for k in range(1, n + 1))
    return MaximalCheck(n, alpha, lhs, etemadi, Fraction(n, alpha * alpha))


def count_table(stats, fields=STAT_FIELDS):
    """Rows ``(*values, count)`` of the joint table projected on ``fields``."""
    marg = stats.marginal(*fields)
    rows = []
    for key, c in marg.items():
        key = key if isinstance(key, tuple) else (key,)
        rows.append((*key, c))
    return rows
