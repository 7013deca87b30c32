"""Small input-validation helpers used across the package."""
import math
import numbers

import numpy as np

from .errors import DomainError


def check_real(value, name, *, low=None, high=None, low_open=False, high_open=False):
    """Return ``value`` as a finite float, enforcing optional bounds."""
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, np.floating, np.integer)):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if math.isnan(value):
        raise DomainError(f"{name} must not be NaN")
    if low is not None:
        if value < low or (low_open and value == low):
            op = ">" if low_open else ">="
            raise DomainError(f"{name} must be {op} {low}, got {value}")
    if high is not None:
        if value > high or (high_open and value == high):
            op = "<" if high_open else "<="
            raise DomainError(f"{name} must be {op} {high}, got {value}")
    return value


def check_int(value, name, *, low=None, high=None):
    if isinstance(value, bool) or not isinstance(value, (numbers.Integral, np.integer)):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise DomainError(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise DomainError(f"{name} must be <= {high}, got {value}")
    return value


def check_delta(delta, *, closed_right=False):
    """Modulus argument: (0, 1) or (0, 1] when ``closed_right``."""
    return check_real(delta, "delta", low=0.0, low_open=True, high=1.0,
                      high_open=not closed_right)


def check_finite_array(values, name, ndim=1):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must contain only finite values")
    return arr


def check_probability_vector(p, name="p", atol=1e-12):
    arr = check_finite_array(p, name)
    if arr.size == 0:
        raise DomainError(f"{name} must be nonempty")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be nonnegative")
    if abs(math.fsum(arr) - 1.0) > atol:
        raise DomainError(f"{name} must sum to 1, got {math.fsum(arr)!r}")
    return arr


def check_samples(samples, name="samples"):
    arr = check_finite_array(np.ravel(np.asarray(samples, dtype=float)), name)
    if arr.size == 0:
        raise DomainError(f"{name} must be nonempty")
    return arr
