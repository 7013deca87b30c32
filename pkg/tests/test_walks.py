from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadlag.errors import CapacityError, DomainError
from cadlag.walks import (STAT_FIELDS, ballot_positive, count_table, enumerate_walks,
                          maximal_inequalities, occupation_conditional, reflection_joint,
                          walk_pmf)
from oracles import binomial_pmf, walk_stats_bruteforce

F = Fraction


def corridor_prob(stats, i, j, l=None):
    """``P(i < m <= M < j [, S = l])`` straight from the enumeration counts."""
    return stats.probability(lambda S, m, M, T, U, V: i < m and M < j and (l is None or S == l))


class TestExamples:
    def test_pmf(self):
        assert walk_pmf(1, 1) == F(1, 2)
        assert walk_pmf(2, 1) == 0
        assert walk_pmf(4, 0) == F(6, 16)
        assert walk_pmf(3, 5) == 0

    def test_pmf_biased(self):
        assert walk_pmf(3, 1, F(1, 3)) == binomial_pmf(3, 2, F(1, 3))
        assert walk_pmf(2, 0, 0.25) == 2 * F(1, 4) * F(3, 4)
        with pytest.raises(DomainError):
            walk_pmf(2, 0, F(3, 2))

    def test_reflection(self):
        assert reflection_joint(2, -3, 3, 0) == F(1, 2)
        assert reflection_joint(4, -3, 3, 0) == F(6, 16)
        assert reflection_joint(1, -2, 2, 1) == F(1, 2)
        for bad in [(2, 0, 3, 1), (2, -1, 0, -1), (2, -2, 2, 2), (2, -2, 2, -2)]:
            with pytest.raises(DomainError):
                reflection_joint(*bad)

    def test_ballot(self):
        assert ballot_positive(3, 1) == F(1, 8)
        assert ballot_positive(1, 1) == F(1, 2)
        assert ballot_positive(3, 3) == F(1, 8)
        with pytest.raises(DomainError):
            ballot_positive(3, 0)

    def test_occupation(self):
        assert occupation_conditional(1, 0) == F(1, 2)
        assert occupation_conditional(1, 1) == F(1, 2)
        assert occupation_conditional(3, 2) == F(1, 4)
        with pytest.raises(DomainError):
            occupation_conditional(3, 4)

    def test_enumeration_small(self):
        s1 = enumerate_walks(1)
        assert s1.counts == {(1, 0, 1, 0, 1, 0): 1, (-1, -1, 0, 0, 0, 0): 1}
        assert enumerate_walks(2).marginal("S") == {-2: 1, 0: 2, 2: 1}

    def test_max_four_steps(self):
        # ++xx (4 paths), +-++ and -+++
        p = enumerate_walks(4).probability(lambda S, m, M, T, U, V: M >= 2)
        assert p == F(3, 8)
        assert p == walk_pmf(4, 2) + 2 * walk_pmf(4, 4)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            enumerate_walks(21)


class TestEnumeration:
    @pytest.mark.parametrize("n", range(0, 11))
    def test_matches_bruteforce(self, n):
        assert enumerate_walks(n).counts == dict(walk_stats_bruteforce(n))

    @pytest.mark.parametrize("n", [5, 12])
    def test_invariants(self, n):
        stats = enumerate_walks(n)
        assert stats.total == 2 ** n
        for S, m, M, T, U, V in stats.counts:
            assert m <= 0 <= M and m <= S <= M
            assert V <= T and V <= U <= n

    def test_count_table(self):
        stats = enumerate_walks(6)
        rows = count_table(stats, ("S",))
        assert sum(r[-1] for r in rows) == 64
        assert len(count_table(stats)[0]) == len(STAT_FIELDS) + 1

    @pytest.mark.parametrize("n", range(1, 17))
    def test_pmf_is_marginal(self, n):
        stats = enumerate_walks(n)
        for i, c in stats.marginal("S").items():
            assert walk_pmf(n, i) == F(c, 2 ** n)


class TestIdentities:
    @pytest.mark.parametrize("n", range(1, 11))
    def test_reflection_against_enumeration(self, n):
        stats = enumerate_walks(n)
        for i in range(-n - 1, 0):
            for j in range(1, n + 2):
                for l in range(i + 1, j):
                    assert reflection_joint(n, i, j, l) == corridor_prob(stats, i, j, l)

    @pytest.mark.parametrize("n", [4, 9, 16])
    def test_reflection_sums(self, n):
        stats = enumerate_walks(n)
        for i in (-1, -2, -(n + 1)):
            for j in (1, 2, n // 2, n + 1):
                total = sum((reflection_joint(n, i, j, l) for l in range(i + 1, j)), F(0))
                assert total == corridor_prob(stats, i, j)
        for j in range(1, n + 2):
            total = sum((reflection_joint(n, -(n + 1), j, l) for l in range(-n, j)), F(0))
            assert total == stats.probability(lambda S, m, M, T, U, V: M < j)

    @pytest.mark.parametrize("n", range(1, 17))
    def test_ballot_against_enumeration(self, n):
        stats = enumerate_walks(n)
        for i in range(1, n + 1):
            def stays_positive(S, m, M, T, U, V):
                return S == i and T == 0 and U == n
            # T == 0 and U == n together mean S_k >= 1 for every k >= 1
            assert ballot_positive(n, i) == stats.probability(stays_positive)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_occupation_against_enumeration(self, n):
        stats = enumerate_walks(2 * n)
        bridge = stats.probability(lambda S, m, M, T, U, V: S == 0)
        for j in range(n + 1):
            joint = stats.probability(lambda S, m, M, T, U, V: S == 0 and V == 2 * j)
            assert joint / bridge == occupation_conditional(n, j)

    @pytest.mark.parametrize("n", range(1, 15))
    def test_maximal_inequalities(self, n):
        stats = enumerate_walks(n)
        for alpha in range(1, n + 1):
            chk = maximal_inequalities(n, alpha, stats)
            assert chk.etemadi_holds and chk.kolmogorov_holds
            assert chk.prob_max == stats.probability(
                lambda S, m, M, T, U, V: max(M, -m) >= alpha)

    def test_maximal_examples(self):
        chk = maximal_inequalities(4, 2)
        assert chk.prob_max == F(12, 16)   # only +-+-, +--+, -++-, -+-+ stay inside
        assert chk.kolmogorov_bound == 1
        assert chk.etemadi_bound == 3


@given(st.integers(0, 60), st.integers(-70, 70))
def test_pmf_symmetry_and_parity(n, i):
    assert walk_pmf(n, i) == walk_pmf(n, -i)
    if (n - i) % 2 or abs(i) > n:
        assert walk_pmf(n, i) == 0


@given(st.integers(0, 80))
def test_pmf_sums_to_one(n):
    assert sum(walk_pmf(n, i) for i in range(-n, n + 1)) == 1


@given(st.integers(1, 40), st.integers(-41, -1), st.integers(1, 41), st.data())
def test_reflection_is_a_subprobability(n, i, j, data):
    l = data.draw(st.integers(i + 1, j - 1))
    r = reflection_joint(n, i, j, l)
    assert 0 <= r <= walk_pmf(n, l)
