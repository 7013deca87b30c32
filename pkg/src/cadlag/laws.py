"""Limit laws of Wiener and Brownian-bridge functionals, evaluated by series.

The two-sided series are summed in ``+k/-k`` pairs with :func:`math.fsum`.
Summation stops once the shifted windows have left the origin and a pair
falls below ``abs_tol``.  From that point the terms are Gaussian tails that
decrease monotonically.
"""
import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_finite_array, check_real
from .errors import DomainError, SeriesTruncationError

SQRT2 = math.sqrt(2.0)
CLAMP_WARN = 1e-10
# Below this corridor width every law evaluated here is smaller than 1e-50
# (theta-function dual series), so it is returned as 0.
_TINY_WIDTH = 0.1


class ClampWarning(RuntimeWarning):
    """A series value left [0, 1] by more than the diagnostic threshold."""


@dataclass(frozen=True)
class SeriesControl:
    abs_tol: float = 1e-12
    max_terms: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")


DEFAULT_CONTROL = SeriesControl()


def _clamp(value, name):
    if value < -CLAMP_WARN or value > 1 + CLAMP_WARN:
        warnings.warn(f"{name}: series value {value!r} clamped to [0, 1]", ClampWarning, stacklevel=3)
    return min(1.0, max(0.0, value))


def normal_cdf(z):
    """Standard normal distribution function."""
    z = check_real(z, "z")
    return 0.5 * math.erfc(-z / SQRT2)


def _phi_diff(hi, lo):
    """``Phi(hi) - Phi(lo)`` without cancellation in the upper tail."""
    if lo > 0:
        return 0.5 * (math.erfc(lo / SQRT2) - math.erfc(hi / SQRT2))
    return 0.5 * (math.erfc(-hi / SQRT2) - math.erfc(-lo / SQRT2))


def _symmetric_sum(term, k_min, control, name):
    parts = [term(0)]
    for k in range(1, control.max_terms + 1):
        a, b = term(k), term(-k)
        parts.append(a)
        parts.append(b)
        if k >= k_min and abs(a) + abs(b) < control.abs_tol * 1e-3:
            return math.fsum(parts)
    raise SeriesTruncationError(f"{name}: no convergence within {control.max_terms} terms")


def wiener_range_joint(a, b, a2, b2, control=DEFAULT_CONTROL):
    """``P(a < m <= M < b, a2 < W_1 < b2)`` for the Wiener process on [0, 1]."""
    a, b = check_real(a, "a", high=0.0), check_real(b, "b", low=0.0)
    if a == b:
        return 0.0
    a2 = check_real(a2, "a'", low=a, high=b)
    b2 = check_real(b2, "b'", low=a2, high=b)
    if a2 == b2 or b - a < _TINY_WIDTH or a == 0.0 or b == 0.0:
        return 0.0
    w = b - a

    def term(k):
        s = 2 * k * w
        return _phi_diff(s + b2, s + a2) - _phi_diff(s + 2 * b - a2, s + 2 * b - b2)

    k_min = math.ceil((abs(a) + abs(b) + abs(a2) + abs(b2)) / (2 * w)) + 1
    return _clamp(_symmetric_sum(term, k_min, control, "wiener_range_joint"), "wiener_range_joint")


def wiener_sup_cdf(b):
    """``P(sup W < b) = 2 Phi(b) - 1``, and 0 for ``b < 0``."""
    b = check_real(b, "b")
    return math.erf(b / SQRT2) if b > 0 else 0.0


def _dual_sum(term, control, name):
    """One-sided sum of a rapidly decreasing series, from ``k = 0``."""
    parts = []
    for k in range(control.max_terms + 1):
        t = term(k)
        parts.append(t)
        if abs(t) < control.abs_tol * 1e-3:
            return math.fsum(parts)
    raise SeriesTruncationError(f"{name}: no convergence within {control.max_terms} terms")


def wiener_abs_sup_cdf(b, control=DEFAULT_CONTROL):
    """``P(sup |W| < b)``, the range law with ``a = -b`` and ``(a', b') = (a, b)``.

    For ``b < 1`` the reflection series cancels almost completely, so its
    theta-function dual ``(4/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 / 8b^2)``
    is summed instead.
    """
    b = check_real(b, "b")
    if b <= 0:
        return 0.0
    if b < 1.0:
        c = math.pi ** 2 / (8 * b * b)

        def term(k):
            return (-1) ** k / (2 * k + 1) * math.exp(-(2 * k + 1) ** 2 * c)

        return _clamp(4 / math.pi * _dual_sum(term, control, "wiener_abs_sup_cdf"),
                      "wiener_abs_sup_cdf")
    return wiener_range_joint(-b, b, -b, b, control)


def arcsine_cdf(t):
    """``(2/pi) arcsin(sqrt t)`` on ``[0, 1]``."""
    t = check_real(t, "t", low=0.0, high=1.0)
    return 2.0 / math.pi * math.asin(math.sqrt(t))


def arcsine_pdf(t):
    t = check_real(t, "t", low=0.0, high=1.0, low_open=True, high_open=True)
    return 1.0 / (math.pi * math.sqrt(t * (1.0 - t)))


def arcsine_density_g(t, z):
    """The kernel ``g(t, z)``; ``t g(t, z)`` is the joint density of the last zero and ``W_1``."""
    t = check_real(t, "t", low=0.0, high=1.0, low_open=True, high_open=True)
    z = check_real(z, "z")
    return abs(z) / (2 * math.pi * (t * (1 - t)) ** 1.5) * math.exp(-z * z / (2 * (1 - t)))


def bridge_range_prob(a, b, control=DEFAULT_CONTROL):
    """``P(a < W°_t < b for all t)`` for the Brownian bridge."""
    a = check_real(a, "a", high=0.0, high_open=True)
    b = check_real(b, "b", low=0.0, low_open=True)
    w = b - a
    if w < _TINY_WIDTH:
        return 0.0

    def term(k):
        return math.exp(-2 * k * k * w * w) - math.exp(-2 * (b + k * w) ** 2)

    k_min = math.ceil(b / w) + 1
    return _clamp(_symmetric_sum(term, k_min, control, "bridge_range_prob"), "bridge_range_prob")


def kolmogorov_cdf(b, control=DEFAULT_CONTROL):
    """``P(sup |W°| <= b) = 1 + 2 sum_k (-1)^k exp(-2 k^2 b^2)``.

    Below ``b = 1`` the dual form ``sqrt(2 pi)/b sum_k exp(-(2k-1)^2 pi^2 / 8b^2)``
    avoids the cancellation of the alternating series.
    """
    b = check_real(b, "b")
    if b <= 0:
        return 0.0
    if b < 1.0:
        c = math.pi ** 2 / (8 * b * b)

        def term(k):
            return math.exp(-(2 * k + 1) ** 2 * c)

        return _clamp(math.sqrt(2 * math.pi) / b * _dual_sum(term, control, "kolmogorov_cdf"),
                      "kolmogorov_cdf")
    parts = [1.0]
    for k in range(1, control.max_terms + 1):
        t = 2.0 * math.exp(-2.0 * k * k * b * b)
        parts.append(-t if k % 2 else t)
        if t < control.abs_tol * 1e-3:
            return _clamp(math.fsum(parts), "kolmogorov_cdf")
    raise SeriesTruncationError(f"kolmogorov_cdf: no convergence within {control.max_terms} terms")


def bridge_sup_cdf(b):
    """``P(sup W° <= b) = 1 - exp(-2 b^2)``."""
    b = check_real(b, "b")
    return -math.expm1(-2.0 * b * b) if b > 0 else 0.0


def bridge_occupation_cdf(u):
    """Occupation time of ``(0, inf)`` by the bridge is uniform on [0, 1]."""
    u = check_real(u, "u")
    return min(1.0, max(0.0, u))


def uniform_cdf(u):
    u = check_real(u, "u")
    return min(1.0, max(0.0, u))


class AtomicMeasureFamily:
    """Measures ``nu_t = sum_r m_r(t) delta_{z_r}`` with piecewise-linear masses.

    ``masses`` holds one ``(times, values)`` pair per atom.  Each mass
    function is continuous and nondecreasing on [0, 1].
    """

    def __init__(self, atoms, masses):
        z = check_finite_array(atoms, "atoms")
        if np.any(z == 0):
            raise DomainError("atoms must be nonzero")
        if len(masses) != z.size:
            raise DomainError("one mass function per atom is required")
        self.atoms = z
        self.masses = []
        for times, values in masses:
            t = check_finite_array(times, "mass times")
            v = check_finite_array(values, "mass values")
            if t.size != v.size or t.size < 2 or t[0] != 0 or t[-1] != 1 or np.any(np.diff(t) <= 0):
                raise DomainError("mass knots must run from 0 to 1 strictly increasing")
            if np.any(np.diff(v) < 0) or v[0] < 0:
                raise DomainError("mass functions must be nonnegative and nondecreasing")
            self.masses.append((t, v))

    def mass(self, r, t):
        times, values = self.masses[r]
        return float(np.interp(t, times, values))

    def H(self, t):
        return math.fsum(self.mass(r, t) for r in range(self.atoms.size))


def levy_cf(family, s, t, u):
    """Characteristic function of the increment over ``(s, t]``."""
    s = check_real(s, "s", low=0.0, high=1.0)
    t = check_real(t, "t", low=0.0, high=1.0)
    u = check_real(u, "u")
    if s > t:
        raise DomainError("need s <= t")
    expo = 0j
    for r, z in enumerate(family.atoms):
        dm = family.mass(r, t) - family.mass(r, s)
        iz = 1j * u * z
        expo += (cmath.exp(iz) - 1 - iz) / (z * z) * dm
    return cmath.exp(expo)


# name -> (callable, parameter names); shared by the CLI and the harness
LAWS = {
    "normal": (normal_cdf, ("z",)),
    "wiener-range-joint": (wiener_range_joint, ("a", "b", "a2", "b2")),
    "wiener-sup": (wiener_sup_cdf, ("b",)),
    "wiener-abs-sup": (wiener_abs_sup_cdf, ("b",)),
    "arcsine": (arcsine_cdf, ("t",)),
    "arcsine-density": (arcsine_pdf, ("t",)),
    "arcsine-g": (arcsine_density_g, ("t", "z")),
    "bridge-range": (bridge_range_prob, ("a", "b")),
    "kolmogorov": (kolmogorov_cdf, ("b",)),
    "bridge-sup": (bridge_sup_cdf, ("b",)),
    "bridge-occupation": (bridge_occupation_cdf, ("u",)),
    "uniform": (uniform_cdf, ("u",)),
}

# one-argument distribution functions usable as Monte Carlo targets
TARGET_CDFS = {
    "wiener-sup": wiener_sup_cdf,
    "wiener-abs-sup": wiener_abs_sup_cdf,
    "arcsine": arcsine_cdf,
    "kolmogorov": kolmogorov_cdf,
    "bridge-sup": bridge_sup_cdf,
    "bridge-occupation": bridge_occupation_cdf,
    "uniform": uniform_cdf,
    "normal": normal_cdf,
}


def evaluate_law(name, **params):
    if name not in LAWS:
        raise DomainError(f"unknown law {name!r}; choose from {sorted(LAWS)}")
    fn, names = LAWS[name]
    missing = [p for p in names if p not in params]
    if missing:
        raise DomainError(f"law {name!r} needs parameters {list(names)}; missing {missing}")
    return fn(*(params[p] for p in names))
