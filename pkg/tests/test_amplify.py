import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_lemma2
from pellsums.amplify import (
    DEFAULT_SEED,
    choose_ell,
    ell_conditions,
    holder_amplification_check,
    lemma2_enumerate,
    make_plan,
    proposition_cancellation,
    sample_units,
)
from pellsums.errors import BudgetExceeded, NotCoprime, RangeError
from pellsums.sieve import primes_between


class TestChooseEll:
    @pytest.mark.parametrize("beta, ell", [(0.10, 1), (0.05, 2), (1 / 14, 1), (0.2, 1), (0.01, 12)])
    def test_examples(self, beta, ell):
        assert choose_ell(beta) == ell

    @pytest.mark.parametrize("beta", [0, -0.1, 1.01])
    def test_rejects(self, beta):
        with pytest.raises(RangeError):
            choose_ell(beta)

    @given(st.floats(0.01, 1 / 6, exclude_max=True))
    def test_both_inequalities_below_one_sixth(self, beta):
        ell = choose_ell(beta)
        assert ell_conditions(beta, ell) == (True, True)
        assert ell >= math.ceil(1 / (14 * beta)) - 1

    @given(st.floats(1 / 6, 1))
    def test_clamped_above_one_sixth(self, beta):
        assert choose_ell(beta) == 1
        assert ell_conditions(beta, 1)[1]


class TestLemma2:
    def test_ell1(self):
        inst = lemma2_enumerate(1, [[2, 3, 5]])
        assert inst.solutions == 3 and inst.dichotomy_holds

    @pytest.mark.parametrize("ps, n", [([2, 3], 6), ([2, 3, 5], 15)])
    def test_ell2(self, ps, n):
        inst = lemma2_enumerate(2, [ps, ps])
        assert inst.solutions == n and inst.matched == n

    @pytest.mark.parametrize("M", [20, 50])
    def test_dyadic_sets(self, M):
        ps = primes_between(M // 2 + 1, M)
        inst = lemma2_enumerate(2, [ps, ps], scales=[M, M])
        assert inst.dichotomy_holds and inst.below_bound
        assert (inst.solutions, inst.matched) == brute_lemma2(2, [ps, ps])

    def test_distinct_sets(self):
        a, b = primes_between(11, 20), primes_between(21, 40)
        inst = lemma2_enumerate(2, [a, b])
        assert (inst.solutions, inst.matched) == brute_lemma2(2, [a, b])
        assert inst.dichotomy_holds

    def test_composites_counted_exactly(self):
        # with composites allowed the count still has to match plain enumeration
        inst = lemma2_enumerate(2, [[2, 4, 6, 12], [2, 4, 6, 12]])
        assert inst.solutions == brute_lemma2(2, [[2, 4, 6, 12]] * 2)[0]

    def test_guards(self):
        with pytest.raises(RangeError):
            lemma2_enumerate(2, [[2, 3]])
        with pytest.raises(RangeError):
            lemma2_enumerate(0, [])
        with pytest.raises(BudgetExceeded):
            lemma2_enumerate(2, [primes_between(2, 1000)] * 2, budget=10**6)


class TestHolder:
    def test_single_interval_equality(self):
        q = 1009**2
        plan = make_plan(q, [(5, 11)], 0.5, 0.1)
        rep = holder_amplification_check(plan, q, 1, [(5, 11)])
        assert plan.ell_i == (1,)
        assert rep.holds
        assert rep.densities[0].primes == 3
        assert rep.densities[0].mass_exceeds_q8
        assert abs(rep.log_lhs - rep.log_rhs) < 1e-9

    @pytest.mark.parametrize("a", [1, 2, 77])
    def test_two_intervals(self, a):
        q = 10007
        ivs = [(20, 40), (5, 11)]
        plan = make_plan(q, ivs, 0.3, 0.1)
        rep = holder_amplification_check(plan, q, a, ivs)
        assert rep.holds
        assert rep.exponent == 4 * math.prod(plan.ell_i)
        for d in rep.densities:
            assert d.l2_ok
            assert d.l1 == d.primes ** (2 * d.ell)

    def test_plan_fields(self):
        q = 10**15 + 37
        plan = make_plan(q, [(40, 70)], 0.5, 0.1)
        assert abs(plan.beta_i[0] - math.log(140) / math.log(q)) < 1e-15
        assert plan.ell_i == (choose_ell(plan.beta_i[0]),)
        assert plan.violations() == []

    def test_plan_flags_small_beta(self):
        plan = make_plan(10**6, [(2, 3)], 0.9, 0.9)
        assert any("rho * beta" in v for v in plan.violations())

    def test_rejects(self):
        plan = make_plan(35, [(2, 3)], 0.5, 0.1)
        with pytest.raises(NotCoprime):
            holder_amplification_check(plan, 35, 7, [(2, 3)])
        with pytest.raises(RangeError):
            holder_amplification_check(plan, 35, 1, [(2, 3), (11, 13)])


class TestCancellation:
    def test_sample_units(self):
        us = sample_units(997**2, 20, 5)
        assert us == sample_units(997**2, 20, 5)
        assert all(math.gcd(a, 997) == 1 for a in us)

    def test_small_instance(self):
        rep = proposition_cancellation(10007, 0.6, 0.1, 2, 10)
        assert rep.N == math.ceil(10007**0.6)
        assert len(rep.samples) == 10
        assert 0 <= rep.median_ratio <= rep.max_ratio <= 1
        assert rep.seed == DEFAULT_SEED

    def test_deterministic(self):
        a = proposition_cancellation(10007, 0.6, 0.1, 2, 5, seed=3)
        b = proposition_cancellation(10007, 0.6, 0.1, 2, 5, seed=3)
        assert a == b

    def test_exceptional_set_independent_of_a(self):
        a = proposition_cancellation(10007, 0.6, 0.1, 2, 3, seed=1)
        b = proposition_cancellation(10007, 0.6, 0.1, 2, 3, seed=2)
        assert a.exceptional_density == b.exceptional_density and a.terms == b.terms
        assert [s[0] for s in a.samples] != [s[0] for s in b.samples]

    def test_zero_samples(self):
        rep = proposition_cancellation(10007, 0.6, 0.1, 2, 0)
        assert rep.samples == () and rep.max_ratio == 0.0

    def test_guards(self):
        with pytest.raises(RangeError):
            proposition_cancellation(101, 0.1, 0.1, 2, 5)
        with pytest.raises(BudgetExceeded):
            proposition_cancellation(10**9, 0.9, 0.1, 2, 1, sieve_limit=10**5)
