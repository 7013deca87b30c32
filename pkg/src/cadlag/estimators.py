"""scikit-learn style wrappers around the path functionals and metrics.

Inputs ``X`` are sequences of :class:`CadlagPath` objects, one per sample.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import laws
from ._validation import check_samples
from .errors import DomainError
from .harness import ks_distance
from .metrics import d_infinity, skorokhod_distance
from .paths import DEFAULT_GRID_STEP, CadlagPath, modulus, uniform_distance
from .simulate import FUNCTIONALS, apply_functional


def check_paths(X):
    """Validate a collection of paths and return it as a tuple."""
    if isinstance(X, CadlagPath):
        raise DomainError("expected a sequence of paths, got a single path")
    paths = tuple(X)
    if not paths:
        raise DomainError("need at least one path")
    for i, x in enumerate(paths):
        if not isinstance(x, CadlagPath):
            raise DomainError(f"sample {i} is not a CadlagPath")
    return paths


class FunctionalTransformer(TransformerMixin, BaseEstimator):
    """Map each path to the value of a path functional."""

    def __init__(self, functional="sup", n=None):
        self.functional = functional
        self.n = n

    def fit(self, X, y=None):
        if self.functional not in FUNCTIONALS:
            raise DomainError(f"unknown functional {self.functional!r}")
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        paths = check_paths(X)
        return np.array([[apply_functional(x, self.functional, self.n)] for x in paths])


class ModulusTransformer(TransformerMixin, BaseEstimator):
    """Map each path to ``[value, error_bound]`` of a modulus at ``delta``."""

    def __init__(self, delta=0.1, kind="w_prime", grid_step=DEFAULT_GRID_STEP):
        self.delta = delta
        self.kind = kind
        self.grid_step = grid_step

    def fit(self, X, y=None):
        if self.kind not in ("w", "w_prime", "w_double_prime"):
            raise DomainError(f"unknown modulus kind {self.kind!r}")
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        out = []
        for x in check_paths(X):
            m = modulus(x, self.delta, self.kind, self.grid_step)
            out.append([m.value, m.error_bound])
        return np.array(out)


class SkorokhodDistance(TransformerMixin, BaseEstimator):
    """Distances from each path to the reference paths seen in ``fit``."""

    def __init__(self, kind="d", mode="exact", grid_step=DEFAULT_GRID_STEP, terms=20):
        self.kind = kind
        self.mode = mode
        self.grid_step = grid_step
        self.terms = terms

    def fit(self, X, y=None):
        if self.kind not in ("d", "dcirc", "uniform", "dinf"):
            raise DomainError(f"unknown distance kind {self.kind!r}")
        self.reference_paths_ = check_paths(X)
        self.n_features_in_ = 1
        return self

    def _dist(self, x, y):
        if self.kind == "uniform":
            return uniform_distance(x, y)
        if self.kind == "dinf":
            return d_infinity(x, y, self.terms, self.grid_step)[0]
        return skorokhod_distance(x, y, self.kind, mode=self.mode, grid_step=self.grid_step).value

    def transform(self, X):
        check_is_fitted(self, "reference_paths_")
        paths = check_paths(X)
        return np.array([[self._dist(x, r) for r in self.reference_paths_] for x in paths])


class LimitLawGoodnessOfFit(BaseEstimator):
    """Kolmogorov-Smirnov agreement of a sample with a limit law.

    ``fit`` stores the KS distance in ``ks_`` and sets ``passed_`` when it is
    at most ``tolerance``.  ``score`` returns the negated KS distance of new
    samples, so larger is better.
    """

    def __init__(self, target="wiener-sup", tolerance=0.03):
        self.target = target
        self.tolerance = tolerance

    def _cdf(self):
        if self.target not in laws.TARGET_CDFS:
            raise DomainError(f"unknown target law {self.target!r}")
        return laws.TARGET_CDFS[self.target]

    def fit(self, X, y=None):
        samples = check_samples(X)
        self.ks_ = ks_distance(samples, self._cdf())
        self.n_samples_ = samples.size
        self.passed_ = bool(self.ks_ <= self.tolerance)
        return self

    def predict(self, X):
        """Target distribution function at the given points."""
        cdf = self._cdf()
        return np.array([cdf(float(v)) for v in check_samples(X)])

    def score(self, X, y=None):
        return -ks_distance(check_samples(X), self._cdf())
