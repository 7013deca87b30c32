import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadlag.errors import DomainError, ModeError
from cadlag.paths import (CadlagPath, discretize, evaluate, largest_jump, modulus,
                          modulus_w, modulus_w_double_prime, modulus_w_prime,
                          oscillation_on_interval, sup_norm, uniform_distance,
                          w_prime_at_least)
from oracles import (random_step_path, w_dense_oracle, w_double_prime_oracle,
                     w_prime_partition_oracle)
from strategies import deltas, pl_paths, step_paths

ind = CadlagPath.indicator


def frac_path(n):
    """Fractional part of n t on [0, 1]."""
    breaks = np.arange(n) / n
    return CadlagPath(breaks, np.zeros(n), np.ones(n), 0.0)


class TestConstruction:
    def test_merges_equal_constant_pieces(self):
        x = CadlagPath.step([0, 0.2, 0.5], [1, 1, 2])
        assert x.n_segments == 2
        assert x.breaks.tolist() == [0.0, 0.5]

    def test_linear_pieces_are_not_merged(self):
        x = CadlagPath.linear([0, 0.5, 1], [0, 1, 2])
        assert x.n_segments == 2 and not x.is_step

    def test_rejects_bad_breaks(self):
        with pytest.raises(DomainError):
            CadlagPath.step([0.1, 0.5], [0, 1])
        with pytest.raises(DomainError):
            CadlagPath.step([0, 0.5, 0.5], [0, 1, 2])
        with pytest.raises(DomainError):
            CadlagPath.step([0, 1.0], [0, 1])
        with pytest.raises(DomainError):
            CadlagPath.step([0, 0.5], [0, math.nan])

    def test_immutable(self):
        x = ind(0.3)
        with pytest.raises(AttributeError):
            x.terminal = 3.0
        with pytest.raises(ValueError):
            x.starts[0] = 1.0

    def test_indicator_shapes(self):
        x = ind(0.4, 0.5)
        assert x(0.39) == 0 and x(0.4) == 1 and x(0.5) == 0 and x.terminal == 0
        assert ind(0.0).starts.tolist() == [1.0]
        assert ind(1.0).jumps()[0].tolist() == [1.0]

    def test_arithmetic(self):
        s = ind(0.3) + ind(0.6)
        assert s.starts.tolist() == [0, 1, 2] and s.terminal == 2
        assert (s - s) == CadlagPath.constant(0.0)
        assert (2 * ind(0.5)).sup() == 2
        assert (-ind(0.5)).inf() == -1


class TestEvaluate:
    def test_examples(self):
        x = ind(0.3)
        assert evaluate(x, 0.3, "right") == 1
        assert evaluate(x, 0.3, "left") == 0
        assert evaluate(CadlagPath.constant(5.0), 1.0, "left") == 5

    def test_errors(self):
        with pytest.raises(DomainError):
            evaluate(ind(0.3), 1.5)
        with pytest.raises(DomainError):
            evaluate(ind(0.3), 0.0, "left")

    def test_linear_interior(self):
        x = CadlagPath.linear([0, 1], [0, 2])
        assert evaluate(x, 0.25) == pytest.approx(0.5)
        assert evaluate(x, 1.0, "left") == 2.0

    @given(step_paths())
    def test_values_at_matches_scalar(self, x):
        ts = np.linspace(0, 1, 41)
        assert np.array_equal(x.values_at(ts), [evaluate(x, t) for t in ts])


class TestNorms:
    def test_uniform_distance_examples(self):
        assert uniform_distance(ind(0.3), ind(0.4)) == 1.0
        assert uniform_distance(ind(0.3), ind(0.3)) == 0.0
        assert uniform_distance(2 * ind(0.5), ind(0.3) + ind(0.6)) == 1.0

    def test_largest_jump_examples(self):
        assert largest_jump(CadlagPath.constant(3.0)) == 0
        assert largest_jump(2 * ind(0.5)) == 2
        assert largest_jump(ind(0.3) + ind(0.6)) == 1

    def test_largest_jump_sees_jump_at_one(self):
        assert largest_jump(CadlagPath.step([0], [0], 2.0)) == 2

    @given(step_paths(), step_paths(), step_paths())
    def test_uniform_metric_axioms(self, x, y, z):
        assert uniform_distance(x, y) == uniform_distance(y, x)
        assert uniform_distance(x, x) == 0
        assert uniform_distance(x, z) <= uniform_distance(x, y) + uniform_distance(y, z) + 1e-12

    @given(pl_paths())
    def test_sup_norm_matches_dense_grid(self, x):
        ts = np.linspace(0, 1, 2001)
        grid = np.abs(x.values_at(np.union1d(ts, x.knots))).max()
        assert sup_norm(x) == pytest.approx(grid, abs=1e-12)


class TestOscillation:
    def test_examples(self):
        x = ind(0.5)
        assert oscillation_on_interval(x, 0, 0.5) == 0
        assert oscillation_on_interval(x, 0.4, 0.6) == 1

    def test_fractional_part_spanning_jump(self):
        # x_2 climbs to 1- at t = 0.5 and restarts at 0, so the range is the full unit
        assert oscillation_on_interval(frac_path(2), 0.45, 0.55) == pytest.approx(1.0)

    def test_closed_interval_includes_right_end(self):
        x = ind(0.5)
        assert oscillation_on_interval(x, 0.2, 0.5, right_open=True) == 0
        assert oscillation_on_interval(x, 0.2, 0.5, right_open=False) == 1

    def test_errors(self):
        with pytest.raises(DomainError):
            oscillation_on_interval(ind(0.5), 0.5, 0.5)

    @given(step_paths(), st.integers(0, 18), st.integers(1, 19), st.integers(0, 5), st.integers(0, 5))
    def test_monotone_under_inclusion(self, x, a, w, ea, eb):
        a, b = a / 20, min(1.0, (a + w) / 20)
        if b <= a:
            return
        A, B = max(0.0, a - ea / 40), min(1.0, b + eb / 40)
        assert oscillation_on_interval(x, a, b) <= oscillation_on_interval(x, A, B) + 1e-12


class TestModulusW:
    @pytest.mark.parametrize("n", [1, 2, 3, 7])
    @pytest.mark.parametrize("delta", [0.01, 0.2, 1.0])
    def test_fractional_part_is_one(self, n, delta):
        assert modulus_w(frac_path(n), delta) == pytest.approx(1.0)

    def test_examples(self):
        assert modulus_w(CadlagPath.constant(2.0), 0.5) == 0
        assert modulus_w(ind(0.5), 0.1) == 1

    def test_linear_slope(self):
        x = CadlagPath.linear([0, 1], [0, 3])
        assert modulus_w(x, 0.25) == pytest.approx(0.75)

    def test_domain(self):
        with pytest.raises(DomainError):
            modulus_w(ind(0.5), 0.0)
        with pytest.raises(DomainError):
            modulus_w(ind(0.5), 1.5)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            x = random_step_path(rng, 4, terminal_jump=True)
            d = float(rng.integers(1, 20)) / 20
            assert modulus_w(x, d) == pytest.approx(w_dense_oracle(x, d, 1e-2), abs=1e-12)

    @given(pl_paths(max_knots=3), deltas)
    def test_affine_paths_match_dense_oracle(self, x, d):
        # the dense grid contains the knots, so it can only undershoot by slope * step
        slope = np.max(np.abs(np.diff(np.append(x.starts, x.terminal)) / np.diff(x.knots)))
        dense = w_dense_oracle(x, d, 2e-3)
        got = modulus_w(x, d)
        assert dense - 1e-9 <= got <= dense + 2 * slope * 2e-3 + 1e-9


class TestModulusWPrime:
    def test_examples(self):
        x = ind(0.0, 0.5)
        assert modulus_w_prime(x, 0.3) == 0
        assert modulus_w_prime(x, 0.6) == 1
        assert modulus_w_prime(CadlagPath.constant(1.0), 0.2) == 0

    def test_tie_is_infeasible(self):
        # the only jump-free partition has a gap of exactly delta
        x = ind(0.0, 0.5)
        assert modulus_w_prime(x, 0.5) == 1

    def test_domain(self):
        for d in (0.0, 1.0, -0.1):
            with pytest.raises(DomainError):
                modulus_w_prime(ind(0.5), d)

    def test_exact_mode_refuses_linear(self):
        with pytest.raises(ModeError):
            modulus_w_prime(CadlagPath.linear([0, 1], [0, 1]), 0.2, exact=True)

    def test_matches_partition_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            x = random_step_path(rng, 5, terminal_jump=True)
            d = float(rng.integers(1, 20)) / 20
            assert modulus_w_prime(x, d) == pytest.approx(w_prime_partition_oracle(x, d), abs=1e-9)

    @given(step_paths(max_jumps=5), deltas, st.sampled_from([0.5, 1.0, 1.5, 2.5]))
    def test_at_least_agrees_with_value(self, x, d, eps):
        assert w_prime_at_least(x, d, eps) == (modulus_w_prime(x, d) >= eps)

    def test_grid_mode_error_bound(self):
        # slope-2 tent: the best partition is [0, .25), [.25, .75), [.75, 1), so w' = 0.5
        x = CadlagPath.linear([0, 0.5, 1], [0, 1, 0])
        m = modulus(x, 0.2, "w_prime", grid_step=1e-3)
        assert m.error_bound == pytest.approx(2e-3)
        assert abs(m.value - 0.5) <= m.error_bound + 1e-12


class TestModulusWDoublePrime:
    @pytest.mark.parametrize("n", [3, 10, 50])
    @pytest.mark.parametrize("delta", [0.05, 0.3, 0.9])
    def test_short_pulse_vanishes(self, n, delta):
        assert modulus_w_double_prime(ind(0.0, 1.0 / n), delta) == 0

    def test_examples(self):
        assert modulus_w_double_prime(ind(0.4, 0.5), 0.2) == 1
        assert modulus_w_double_prime(ind(0.4, 0.5), 0.05) == 0

    def test_matches_triple_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(15):
            x = random_step_path(rng, 4, terminal_jump=True)
            d = float(rng.integers(1, 20)) / 20
            assert modulus_w_double_prime(x, d) == pytest.approx(w_double_prime_oracle(x, d, 60))


class TestModulusInequalities:
    @given(step_paths(max_jumps=5), deltas, deltas)
    def test_monotone_in_delta(self, x, d1, d2):
        lo, hi = min(d1, d2), max(d1, d2)
        assert modulus_w(x, lo) <= modulus_w(x, hi) + 1e-12
        assert modulus_w_prime(x, lo) <= modulus_w_prime(x, hi) + 1e-12
        assert modulus_w_double_prime(x, lo) <= modulus_w_double_prime(x, hi) + 1e-12

    @given(step_paths(max_jumps=5), deltas)
    def test_lattice(self, x, d):
        wp = modulus_w_prime(x, d)
        j = largest_jump(x)
        assert modulus_w_double_prime(x, d) <= wp + 1e-9
        assert wp <= modulus_w(x, min(1.0, 2 * d)) + 1e-9
        assert j - 1e-9 <= modulus_w(x, d) <= 2 * wp + j + 1e-9

    @given(step_paths(max_jumps=5), deltas)
    def test_sandwich(self, x, d):
        mid = max(modulus_w_double_prime(x, d), abs(x(d) - x(0.0)),
                  abs(x(1.0, side="left") - x(1.0 - d)))
        assert modulus_w_prime(x, d / 2) / 24 <= mid + 1e-9
        assert mid <= modulus_w_prime(x, d) + 1e-9

    @given(step_paths(), step_paths(), deltas)
    def test_lipschitz_in_uniform_metric(self, x, y, d):
        u = uniform_distance(x, y)
        assert abs(modulus_w(x, d) - modulus_w(y, d)) <= 2 * u + 1e-9
        assert abs(modulus_w_prime(x, d) - modulus_w_prime(y, d)) <= 2 * u + 1e-9


class TestDiscretize:
    @given(pl_paths(), st.sampled_from([0.1, 0.01, 0.003]))
    def test_uniform_error(self, x, h):
        s, eta = discretize(x, h)
        assert s.is_step
        ts = np.linspace(0, 1, 1001)
        assert np.max(np.abs(s.values_at(ts) - x.values_at(ts))) <= eta + 1e-12

    def test_step_paths_unchanged(self):
        x = ind(0.3)
        assert discretize(x) == (x, 0.0)
