"""Monte Carlo experiments and probes for the functional limit theorems.

Each replica draws from its own :class:`SeededStream`, so results do not
depend on how replicas are split across workers.  Pass thresholds live in the
configuration; the named experiments carry defaults.
"""
import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import laws
from ._validation import check_int, check_probability_vector, check_real, check_samples
from .errors import CapacityError, ConfigError, DomainError
from .paths import CadlagPath, modulus_w, w_prime_at_least
from .simulate import IncrementLaw, SeededStream, donsker_path, walk_functionals


# ---------------------------------------------------------------------------
# distances


def _cdf_values(target, x):
    if isinstance(target, str):
        if target not in laws.TARGET_CDFS:
            raise ConfigError(f"unknown target law {target!r}")
        target = laws.TARGET_CDFS[target]
    try:
        out = np.asarray(target(x), dtype=float)
        if out.shape == np.shape(x):
            return out
    except (TypeError, ValueError):
        pass
    return np.array([target(float(v)) for v in x], dtype=float)


def ks_distance(samples, target_cdf):
    """``sup_t |F_N(t) - F(t)|`` using both one-sided gaps at every order statistic."""
    x = np.sort(check_samples(samples))
    N = x.size
    F = _cdf_values(target_cdf, x)
    i = np.arange(1, N + 1)
    d_plus = np.max(i / N - F)
    d_minus = np.max(F - (i - 1) / N)
    return float(max(d_plus, d_minus, 0.0))


def tv_distance(counts, pmf):
    """Half the L1 distance between an empirical histogram and a target pmf.

    ``counts`` and ``pmf`` map support points to counts and probabilities.
    ``pmf`` may also be a callable on integers.  Then the target mass outside
    the observed support is added as a single term.
    """
    counts = {k: int(v) for k, v in dict(counts).items()}
    total = sum(counts.values())
    if total <= 0:
        raise DomainError("counts must have positive total")
    if callable(pmf):
        seen = {k: float(pmf(k)) for k in counts}
        outside = max(0.0, 1.0 - math.fsum(seen.values()))
        parts = [abs(counts[k] / total - seen[k]) for k in counts]
        return 0.5 * (math.fsum(parts) + outside)
    pmf = {k: float(v) for k, v in dict(pmf).items()}
    keys = sorted(set(counts) | set(pmf))
    return 0.5 * math.fsum(abs(counts.get(k, 0) / total - pmf.get(k, 0.0)) for k in keys)


def poisson_pmf(alpha):
    return lambda k: math.exp(-alpha + k * math.log(alpha) - math.lgamma(k + 1)) if k >= 0 else 0.0


# ---------------------------------------------------------------------------
# experiments


# name -> process kind, functional, target, variant, default n, default tolerance, report grid
EXPERIMENTS = {
    "donsker-sup": dict(process="walk", functional="sup", target="wiener-sup", variant="D",
                        n=500, tolerance=0.03, grid=(0.0, 3.0, 31)),
    "donsker-sup-abs": dict(process="walk", functional="sup_abs", target="wiener-abs-sup",
                            variant="D", n=500, tolerance=0.03, grid=(0.25, 3.0, 23)),
    "arcsine-occupation": dict(process="walk", functional="occupation_positive", target="arcsine",
                               variant="C", n=500, tolerance=0.03, grid=(0.0, 1.0, 21)),
    # walks that never change sign put mass 2 C(2n, n) / 4^n (0.0505 at n=500) at zero
    "arcsine-last-zero": dict(process="walk", functional="last_zero", target="arcsine",
                              variant="C", n=500, tolerance=0.062, grid=(0.0, 1.0, 21)),
    "bridge-sup": dict(process="walk-bridge", functional="sup", target="bridge-sup", variant="C",
                       n=500, tolerance=0.03, grid=(0.0, 2.5, 26)),
    "ks-empirical": dict(process="empirical", functional="sup_abs", target="kolmogorov",
                         variant="D", n=500, tolerance=0.03, grid=(0.2, 2.2, 21)),
    "fdd-marginal": dict(process="walk-marginal", functional="value", target="normal",
                         variant="D", n=500, tolerance=0.03, grid=(-3.0, 3.0, 25)),
    "poisson": dict(process="poisson", functional="terminal", target="poisson", variant="D",
                    n=10_000, tolerance=0.02, grid=(0, 12, 13)),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int
    replicas: int
    seed: int
    tolerance: float
    law: str = "centered-uniform"
    variant: str = "D"
    grid: tuple = ()
    alpha: float = 2.0
    t: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if self.replicas < 100:
            raise ConfigError("replicas must be at least 100")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.variant not in ("C", "D"):
            raise ConfigError("variant must be 'C' or 'D'")
        try:
            IncrementLaw(self.law)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    @classmethod
    def preset(cls, experiment, *, n=None, replicas=None, seed=0, tolerance=None, law=None,
               workers=1, alpha=2.0, t=0.5):
        """Configuration with the documented defaults of a named experiment."""
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}")
        entry = EXPERIMENTS[experiment]
        replicas = replicas if replicas is not None else (100_000 if experiment == "poisson" else 20_000)
        if tolerance is None:
            tolerance = entry["tolerance"]
        lo, hi, k = entry["grid"]
        grid = tuple(float(v) for v in np.linspace(lo, hi, k))
        return cls(experiment=experiment, n=n if n is not None else entry["n"], replicas=replicas,
                   seed=seed, tolerance=tolerance, law=law or "centered-uniform",
                   variant=entry["variant"], grid=grid, workers=workers, alpha=alpha, t=t)

    def to_dict(self):
        d = asdict(self)
        d["grid"] = list(self.grid)
        d.pop("workers")   # results do not depend on the worker count
        return d


@dataclass
class ExperimentReport:
    config: dict
    grid: list
    empirical: list
    target: list
    distance_kind: str
    distance: float
    tolerance: float
    passed: bool
    summary: dict
    runtime_seconds: float = field(default=0.0, compare=False)

    def to_dict(self, include_runtime=False):
        d = {
            "config": self.config, "grid": self.grid, "empirical": self.empirical,
            "target": self.target, "distance_kind": self.distance_kind, "distance": self.distance,
            "tolerance": self.tolerance, "passed": self.passed, "summary": self.summary,
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    def to_json(self, include_runtime=False):
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grid", "empirical", "target"])
        for row in zip(self.grid, self.empirical, self.target):
            w.writerow([repr(float(v)) for v in row])
        w.writerow([])
        w.writerow([self.distance_kind, repr(self.distance)])
        w.writerow(["tolerance", repr(self.tolerance)])
        w.writerow(["passed", str(self.passed).lower()])
        return buf.getvalue()


def _walk_block(args):
    seed, start, stop, n, law_kind = args
    law = IncrementLaw(law_kind)
    out = np.empty((stop - start, n + 1))
    out[:, 0] = 0.0
    for r in range(start, stop):
        xi = law.sample(SeededStream(seed, r).generator(), n)
        np.cumsum(xi, out=out[r - start, 1:])
    return out / (law.sigma * math.sqrt(n))


def _empirical_block(args):
    seed, start, stop, n = args
    out = np.empty(stop - start)
    i = np.arange(1, n + 1)
    for r in range(start, stop):
        u = np.sort(1.0 - SeededStream(seed, r).generator().random(n))
        out[r - start] = max(np.max(i / n - u), np.max(u - (i - 1) / n))
    return out * math.sqrt(n)


def _poisson_block(args):
    seed, start, stop, n, alpha = args
    return np.array([SeededStream(seed, r).generator().binomial(n, alpha / n)
                     for r in range(start, stop)], dtype=np.int64)


def _run_blocks(fn, cfg, extra):
    step = math.ceil(cfg.replicas / cfg.workers)
    jobs = [(cfg.seed, a, min(a + step, cfg.replicas), *extra) for a in range(0, cfg.replicas, step)]
    if cfg.workers == 1:
        parts = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(fn, jobs))
    return np.concatenate(parts)


def simulate_functional(cfg):
    """The ``replicas`` functional values of a configured experiment, in stream order."""
    entry = EXPERIMENTS[cfg.experiment]
    proc = entry["process"]
    if proc == "empirical":
        return _run_blocks(_empirical_block, cfg, (cfg.n,))
    if proc == "poisson":
        if cfg.alpha >= cfg.n:
            raise DomainError("need alpha < n")
        return _run_blocks(_poisson_block, cfg, (cfg.n, cfg.alpha))
    S = _run_blocks(_walk_block, cfg, (cfg.n, cfg.law))
    if proc == "walk-bridge":
        S = S - np.outer(S[:, -1], np.arange(cfg.n + 1) / cfg.n)
    if proc == "walk-marginal":
        k = math.floor(cfg.n * cfg.t)
        return S[:, k] / math.sqrt(k / cfg.n)
    return walk_functionals(S, entry["functional"], cfg.variant)


def _round(v):
    return float(np.float64(v))


def run_convergence_experiment(cfg):
    """Simulate, compare with the limit law, and report."""
    if not isinstance(cfg, ExperimentConfig):
        raise ConfigError("run_convergence_experiment needs an ExperimentConfig")
    t0 = time.perf_counter()
    entry = EXPERIMENTS[cfg.experiment]
    values = simulate_functional(cfg)
    grid = [float(g) for g in cfg.grid]
    summary = {"mean": _round(np.mean(values)), "std": _round(np.std(values)),
               "replicas": int(values.size)}
    if entry["target"] == "poisson":
        pmf = poisson_pmf(cfg.alpha)
        ks, cnt = np.unique(values, return_counts=True)
        counts = {int(k): int(c) for k, c in zip(ks, cnt)}
        dist = tv_distance(counts, pmf)
        support = [int(g) for g in grid]
        empirical = [counts.get(k, 0) / values.size for k in support]
        target = [pmf(k) for k in support]
        kind = "tv"
    else:
        target_fn = laws.TARGET_CDFS[entry["target"]]
        dist = ks_distance(values, target_fn)
        sv = np.sort(values)
        empirical = (np.searchsorted(sv, grid, side="right") / sv.size).tolist()
        target = [float(target_fn(g)) for g in grid]
        kind = "ks"
    return ExperimentReport(config=cfg.to_dict(), grid=grid, empirical=[float(e) for e in empirical],
                            target=[float(t) for t in target], distance_kind=kind,
                            distance=float(dist), tolerance=cfg.tolerance,
                            passed=bool(dist <= cfg.tolerance), summary=summary,
                            runtime_seconds=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# probes


@dataclass
class TightnessReport:
    process: str
    modulus: str
    epsilon: float
    deltas: list
    estimates: list
    standard_errors: list
    monotone: bool
    tight: bool
    threshold: float

    def to_dict(self):
        return asdict(self)


def spike_path(n):
    """Triangle of height 1 on ``[0, 2/n]``, zero afterwards."""
    n = check_int(n, "n", low=3)
    return CadlagPath.linear([0.0, 1.0 / n, 2.0 / n, 1.0], [0.0, 1.0, 0.0, 0.0])


def tightness_probe(process, n, replicas, deltas, epsilon, *, seed=0, law="rademacher",
                    modulus=None, threshold=0.05):
    """Estimate ``P(w'(X^n, delta) >= eps)`` (``w`` for continuous processes) per delta.

    All deltas share the same replicas.  ``monotone`` checks that estimates
    do not increase as delta shrinks, within two standard errors.  ``tight``
    is set when the estimate at the smallest delta falls below ``threshold``.
    """
    n = check_int(n, "n", low=1)
    replicas = check_int(replicas, "replicas", low=1)
    epsilon = check_real(epsilon, "epsilon", low=0.0, low_open=True)
    deltas = sorted((float(d) for d in deltas), reverse=True)
    if process not in ("donsker-D", "donsker-C", "constant", "spike"):
        raise ConfigError(f"unknown process {process!r}")
    if modulus is None:
        modulus = "w_prime" if process == "donsker-D" else "w"
    if modulus not in ("w", "w_prime"):
        raise ConfigError("modulus must be 'w' or 'w_prime'")
    inc = IncrementLaw(law)
    hits = np.zeros(len(deltas))
    for r in range(replicas):
        if process == "constant":
            x = CadlagPath.constant(0.0)
        elif process == "spike":
            x = spike_path(n)
        else:
            x = donsker_path(n, inc, SeededStream(seed, r), process[-1])
        for k, d in enumerate(deltas):
            if modulus == "w_prime":
                hits[k] += w_prime_at_least(x, d, epsilon)
            else:
                hits[k] += modulus_w(x, d) >= epsilon
    est = hits / replicas
    se = np.sqrt(est * (1 - est) / replicas)
    monotone = all(est[k + 1] <= est[k] + 2 * math.hypot(se[k], se[k + 1])
                   for k in range(len(deltas) - 1))
    return TightnessReport(process, modulus, epsilon, deltas, est.tolist(), se.tolist(),
                           bool(monotone), bool(est[-1] < threshold), threshold)


@dataclass
class MomentRow:
    r: float
    s: float
    t: float
    estimate: float
    standard_error: float
    bound: float
    exact_zero: bool
    passed: bool


def moment_condition_probe(n, replicas, triples, *, beta=2.0, alpha=2.0, H=lambda t: 2.0 * t,
                           seed=0, law="rademacher"):
    """Check ``E|X_s - X_r|^beta |X_t - X_s|^beta <= (H(t) - H(r))^alpha`` on D-paths.

    Passes when the estimate is at most the bound plus three standard errors.
    When ``t - r < 1/n`` one of the two increments vanishes on every path, so
    the estimate must be exactly zero.
    """
    n = check_int(n, "n", low=1)
    replicas = check_int(replicas, "replicas", low=2)
    beta = check_real(beta, "beta", low=0.0, low_open=True)
    alpha = check_real(alpha, "alpha", low=0.0, low_open=True)
    cfg = ExperimentConfig("donsker-sup", n, max(replicas, 100), seed, 1.0, law=law)
    S = _walk_block((seed, 0, replicas, n, cfg.law))
    rows = []
    for r, s, t in triples:
        if not 0 <= r <= s <= t <= 1:
            raise DomainError("triples need 0 <= r <= s <= t <= 1")
        ir, is_, it = (math.floor(n * v) for v in (r, s, t))
        prod = np.abs(S[:, is_] - S[:, ir]) ** beta * np.abs(S[:, it] - S[:, is_]) ** beta
        est = float(prod.mean())
        se = float(prod.std(ddof=1) / math.sqrt(replicas))
        bound = (H(t) - H(r)) ** alpha
        zero = t - r < 1.0 / n
        ok = est <= bound + 3 * se and (not zero or est == 0.0)
        rows.append(MomentRow(r, s, t, est, se, float(bound), zero, bool(ok)))
    return rows


def binomial_pmf_exact(n, k, p):
    p = Fraction(repr(p)) if isinstance(p, float) else Fraction(p)
    return math.comb(n, k) * p ** k * (1 - p) ** (n - k)


def local_limit_errors(n, p):
    """Lattice points ``z`` with ``|z| <= 3`` and ``|sqrt(npq) P(S_n = i) - phi(z)|`` at each.

    ``S_n`` counts successes in ``n`` trials; the pmf is evaluated exactly.
    """
    n = check_int(n, "n", low=1)
    p = check_real(p, "p", low=0.0, high=1.0, low_open=True, high_open=True)
    var = n * p * (1.0 - p)
    if var < 9:
        raise DomainError("the probe needs n p (1-p) >= 9")
    sd = math.sqrt(var)
    zs, errs = [], []
    for i in range(max(math.ceil(n * p - 3 * sd), 0), min(math.floor(n * p + 3 * sd), n) + 1):
        z = (i - n * p) / sd
        if abs(z) > 3:
            continue
        pmf = float(binomial_pmf_exact(n, i, p))
        zs.append(z)
        errs.append(abs(sd * pmf - math.exp(-z * z / 2) / math.sqrt(2 * math.pi)))
    return np.array(zs), np.array(errs)


def local_limit_probe(n, p):
    """``sup_{|z| <= 3} |sqrt(npq) P(S_n = i) - phi(z)|`` over lattice points."""
    return float(local_limit_errors(n, p)[1].max())


@dataclass
class CovarianceReport:
    n: int
    p: list
    replicas: int
    empirical: list
    theoretical: list
    max_deviation: float
    tolerance: float
    passed: bool


def multinomial_covariance(p):
    p = np.asarray(p, dtype=float)
    return np.diag(p) - np.outer(p, p)


def multinomial_cov_probe(n, p, replicas, *, seed=0, tolerance=0.01):
    """Empirical covariance of ``(counts - n p)/sqrt(n)`` against ``diag(p) - p p^T``."""
    n = check_int(n, "n", low=1)
    p = check_probability_vector(p)
    replicas = check_int(replicas, "replicas", low=2)
    counts = SeededStream(seed, 0).generator().multinomial(n, p, size=replicas)
    z = (counts - n * p) / math.sqrt(n)
    emp = np.atleast_2d(np.cov(z, rowvar=False))
    V = multinomial_covariance(p)
    dev = float(np.max(np.abs(emp - V)))
    return CovarianceReport(n, p.tolist(), replicas, emp.tolist(), V.tolist(), dev, tolerance,
                            dev <= tolerance)


@dataclass
class BridgeReport:
    b: float
    epsilon: float
    n: int
    accepted: int
    acceptance_rate: float
    estimate: float
    target: float
    tolerance: float
    passed: bool


def bridge_conditioning_probe(b, epsilon, n, accepted, *, seed=0, law="centered-uniform",
                              tolerance=0.04, min_acceptance=1e-3, batch=20_000):
    """Condition walks on ``0 <= X^n(1) <= epsilon`` by rejection.

    The estimate of ``P(sup X^n <= b)`` under this condition is compared with
    the bridge law ``1 - exp(-2 b^2)``.  A capacity error is raised if the
    first batch accepts fewer than ``min_acceptance`` of its walks.
    """
    b = check_real(b, "b", low=0.0, low_open=True)
    epsilon = check_real(epsilon, "epsilon", low=0.0, low_open=True)
    n = check_int(n, "n", low=1)
    accepted = check_int(accepted, "accepted", low=1)
    inc = IncrementLaw(law)
    hits = kept = tried = 0
    block = 0
    while kept < accepted:
        # one stream per batch; batches are consumed in order
        xi = inc.sample(SeededStream(seed, block).generator(), (batch, n))
        S = np.cumsum(xi, axis=1) / (inc.sigma * math.sqrt(n))
        block += 1
        tried += S.shape[0]
        ok = (S[:, -1] >= 0) & (S[:, -1] <= epsilon)
        if block == 1 and ok.mean() < min_acceptance:
            raise CapacityError(f"acceptance rate {ok.mean():.2e} is below the floor "
                                f"{min_acceptance:.0e} (epsilon={epsilon}, n={n})")
        sup = S[ok].max(axis=1)
        kept += int(ok.sum())
        hits += int((sup <= b).sum())
    est = hits / kept
    target = laws.bridge_sup_cdf(b)
    return BridgeReport(b, epsilon, n, kept, kept / tried, est, target, tolerance,
                        abs(est - target) <= tolerance)
