import json
import math

import numpy as np
import pytest

from cadlag.errors import CapacityError, ConfigError, DomainError
from cadlag.harness import (EXPERIMENTS, ExperimentConfig, bridge_conditioning_probe, ks_distance,
                            local_limit_errors, local_limit_probe, moment_condition_probe,
                            multinomial_cov_probe, multinomial_covariance, poisson_pmf,
                            run_convergence_experiment, simulate_functional, tightness_probe,
                            tv_distance)
from cadlag.laws import uniform_cdf


class TestKS:
    def test_examples(self):
        assert ks_distance([0.25, 0.75], "uniform") == pytest.approx(0.25)
        for x in (0.1, 0.5, 0.8):
            assert ks_distance([x], uniform_cdf) == pytest.approx(max(x, 1 - x))
        with pytest.raises(DomainError):
            ks_distance([], "uniform")
        with pytest.raises(ConfigError):
            ks_distance([0.5], "cauchy")

    def test_glivenko_cantelli_trend(self):
        rng = np.random.default_rng(0)
        small = np.mean([ks_distance(rng.random(1_000), "uniform") for _ in range(20)])
        large = np.mean([ks_distance(rng.random(10_000), "uniform") for _ in range(20)])
        assert large < small / 2

    def test_dkw_self_calibration(self):
        N = 200
        bound = math.sqrt(math.log(2 / 0.001) / (2 * N))
        below = sum(ks_distance(np.random.default_rng(s).random(N), "uniform") < bound
                    for s in range(1000))
        assert below >= 999


class TestTV:
    def test_examples(self):
        assert tv_distance({0: 3, 1: 1}, {0: 0.75, 1: 0.25}) == 0
        assert tv_distance({0: 5}, {1: 1.0}) == 1
        assert tv_distance({0: 1, 1: 1}, {0: 1.0}) == 0.5
        with pytest.raises(DomainError):
            tv_distance({}, {0: 1.0})

    def test_callable_target_counts_outside_mass(self):
        pmf = poisson_pmf(2.0)
        assert math.fsum(pmf(k) for k in range(60)) == pytest.approx(1.0)
        assert tv_distance({0: 1}, pmf) == pytest.approx(1 - math.exp(-2.0))
        table = {k: pmf(k) for k in range(60)}
        assert tv_distance({0: 1}, pmf) == pytest.approx(tv_distance({0: 1}, table), abs=1e-12)


class TestConfig:
    def test_preset_defaults(self):
        cfg = ExperimentConfig.preset("donsker-sup")
        assert (cfg.n, cfg.replicas, cfg.seed, cfg.tolerance) == (500, 20_000, 0, 0.03)
        assert ExperimentConfig.preset("poisson").replicas == 100_000
        assert "workers" not in cfg.to_dict()

    @pytest.mark.parametrize("kw", [dict(experiment="nope"), dict(replicas=50), dict(tolerance=0.0),
                                    dict(law="cauchy"), dict(variant="E"), dict(workers=0),
                                    dict(n=0)])
    def test_errors(self, kw):
        base = dict(experiment="donsker-sup", n=100, replicas=200, seed=0, tolerance=0.03)
        base.update(kw)
        with pytest.raises(ConfigError):
            ExperimentConfig(**base)

    def test_run_needs_config(self):
        with pytest.raises(ConfigError):
            run_convergence_experiment({"experiment": "donsker-sup"})


class TestExperiments:
    def test_spec_donsker_example(self):
        rep = run_convergence_experiment(ExperimentConfig.preset("donsker-sup", n=400))
        assert rep.distance_kind == "ks" and rep.passed and rep.distance <= 0.03

    def test_reproducible_and_worker_independent(self):
        cfg = ExperimentConfig.preset("arcsine-occupation", n=100, replicas=1000, seed=3)
        a = run_convergence_experiment(cfg).to_json()
        b = run_convergence_experiment(cfg).to_json()
        assert a == b
        par = ExperimentConfig.preset("arcsine-occupation", n=100, replicas=1000, seed=3, workers=2)
        assert run_convergence_experiment(par).to_json() == a
        other = ExperimentConfig.preset("arcsine-occupation", n=100, replicas=1000, seed=4)
        assert run_convergence_experiment(other).to_json() != a

    def test_prefix_stability(self):
        # replica r always uses stream r, so a larger run extends a smaller one
        small = simulate_functional(ExperimentConfig.preset("donsker-sup", n=50, replicas=300))
        big = simulate_functional(ExperimentConfig.preset("donsker-sup", n=50, replicas=600))
        assert np.array_equal(small, big[:300])

    def test_report_formats(self):
        rep = run_convergence_experiment(ExperimentConfig.preset("poisson", n=1000, replicas=2000))
        d = json.loads(rep.to_json())
        assert d["distance_kind"] == "tv" and "runtime_seconds" not in d
        assert "runtime_seconds" in rep.to_dict(include_runtime=True)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "grid,empirical,target"
        assert lines[-3].startswith("tv,") and lines[-1] in ("passed,true", "passed,false")
        assert len(rep.grid) == len(rep.empirical) == len(rep.target) == 13

    @pytest.mark.parametrize("name", sorted(EXPERIMENTS))
    def test_every_experiment_runs(self, name):
        rep = run_convergence_experiment(ExperimentConfig.preset(name, n=60, replicas=500))
        assert 0 <= rep.distance <= 1
        assert rep.summary["replicas"] == 500

    def test_fdd_marginal(self):
        rep = run_convergence_experiment(ExperimentConfig.preset("fdd-marginal", n=200, replicas=5000))
        assert rep.distance <= 3 * 0.5 / math.sqrt(5000) + 0.01


class TestTightness:
    def test_constant_process(self):
        rep = tightness_probe("constant", 100, 50, [0.2, 0.1], 0.5)
        assert rep.estimates == [0.0, 0.0] and rep.tight

    def test_spike_not_tight(self):
        rep = tightness_probe("spike", 400, 20, [0.2, 0.1, 0.05, 0.025], 0.5)
        assert rep.modulus == "w" and all(e == 1.0 for e in rep.estimates)
        assert not rep.tight

    def test_donsker_decay(self):
        rep = tightness_probe("donsker-D", 200, 300, [0.2, 0.1, 0.05, 0.025, 0.0125], 0.5)
        assert rep.modulus == "w_prime" and rep.monotone
        assert rep.estimates[0] > rep.estimates[-1]

    def test_continuous_variant_uses_w(self):
        rep = tightness_probe("donsker-C", 100, 100, [0.2, 0.05], 0.5)
        assert rep.modulus == "w" and rep.monotone

    def test_unknown_process(self):
        with pytest.raises(ConfigError):
            tightness_probe("levy", 10, 10, [0.1], 0.5)


class TestMoment:
    def test_examples(self):
        rows = moment_condition_probe(100, 2000, [(0.1, 0.5, 0.9), (0.3, 0.3, 0.3), (0.5, 0.502, 0.505)])
        main, degenerate, tiny = rows
        assert main.passed and main.estimate <= (2 * 0.8) ** 2
        assert degenerate.estimate == 0 and degenerate.passed
        assert tiny.exact_zero and tiny.estimate == 0 and tiny.passed

    def test_bad_triple(self):
        with pytest.raises(DomainError):
            moment_condition_probe(10, 10, [(0.5, 0.2, 0.9)])


class TestLocalLimit:
    def test_threshold(self):
        assert local_limit_probe(10_000, 0.5) <= 0.01

    def test_decreasing(self):
        errs = [local_limit_probe(n, 0.5) for n in (100, 400, 1600)]
        assert errs[0] > errs[1] > errs[2]
        assert local_limit_probe(900, 0.3) < local_limit_probe(100, 0.3)

    def test_lattice(self):
        zs, errs = local_limit_errors(100, 0.5)
        assert np.all(np.abs(zs) <= 3) and zs.size == errs.size == 31

    def test_tiny_n(self):
        with pytest.raises(DomainError):
            local_limit_probe(20, 0.5)


class TestMultinomial:
    def test_matrix(self):
        assert np.allclose(multinomial_covariance([0.5, 0.5]), [[0.25, -0.25], [-0.25, 0.25]])

    def test_probe(self):
        rep = multinomial_cov_probe(100, [0.2, 0.3, 0.5], 20_000)
        assert rep.passed and rep.max_deviation <= 0.01
        with pytest.raises(DomainError):
            multinomial_cov_probe(10, [0.5, 0.6], 100)


class TestBridgeProbe:
    def test_example(self):
        rep = bridge_conditioning_probe(1.0, 0.1, 400, 5000)
        assert rep.accepted >= 5000 and rep.passed
        assert abs(rep.estimate - 0.864665) <= 0.04

    def test_limits(self):
        assert bridge_conditioning_probe(5.0, 0.1, 100, 1000).estimate == 1.0
        assert bridge_conditioning_probe(0.01, 0.1, 100, 1000).estimate <= 0.05

    def test_capacity(self):
        with pytest.raises(CapacityError):
            bridge_conditioning_probe(1.0, 1e-7, 400, 100, batch=2000)

    def test_reproducible(self):
        a = bridge_conditioning_probe(1.0, 0.2, 100, 2000, seed=9)
        assert a == bridge_conditioning_probe(1.0, 0.2, 100, 2000, seed=9)
