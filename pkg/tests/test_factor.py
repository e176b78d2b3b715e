import math

import numpy as np
import pytest

from oracles import brute_exceptional, prime_factors_desc, smooth_numbers
from pellsums.errors import NotCoprime, RangeError
from pellsums.factor import (
    ExceptionalParams,
    box_partition,
    exceptional_set,
    partition_sums,
    psi_smooth_count,
)
from pellsums.sieve import FactorTable


@pytest.fixture(scope="module")
def table():
    return FactorTable(10**4)


class TestPsi:
    def test_example(self):
        assert psi_smooth_count(100, 5) == 34

    @pytest.mark.parametrize("N, y", [(1000, 7), (5000, 13), (10**4, 30), (10**4, 2), (777, 1.5), (50, 100)])
    def test_against_enumeration(self, N, y, table):
        assert psi_smooth_count(N, y) == len(smooth_numbers(N, y))
        assert psi_smooth_count(N, y, table) == len(smooth_numbers(N, y))

    def test_monotone(self):
        vals = [psi_smooth_count(3000, y) for y in (2, 3, 5, 10, 50, 3000)]
        assert vals == sorted(vals) and vals[-1] == 3000

    def test_rejects(self):
        with pytest.raises(RangeError):
            psi_smooth_count(0, 5)


class TestParams:
    @pytest.mark.parametrize("kw", [dict(N=1, beta=0.1, r=2), dict(N=100, beta=0, r=2), dict(N=100, beta=0.1, r=0)])
    def test_rejects(self, kw):
        with pytest.raises(RangeError):
            ExceptionalParams(**kw)

    def test_proposition_range(self):
        assert not ExceptionalParams(10**6, 0.05, 3).in_proposition_range
        assert ExceptionalParams(10**30, 0.05, 3).in_proposition_range


def strict_oracle(n, N, beta, r):
    if brute_exceptional(n, N, beta, r):
        return True
    ps = prime_factors_desc(n)
    s = 1 + 10 / math.log(N)
    return len(ps) > r and ps[r - 1] <= s * ps[r]


class TestExceptional:
    @pytest.mark.parametrize("beta, r, spacing", [(0.1, 2, True), (0.05, 3, True), (0.2, 1, True), (0.1, 2, False)])
    def test_membership(self, table, beta, r, spacing):
        N = 10**4
        E = exceptional_set(ExceptionalParams(N, beta, r, spacing), table)
        for n in range(1, N + 1, 7):
            assert (n in E) == brute_exceptional(n, N, beta, r, spacing), n

    def test_strict(self, table):
        N = 10**4
        p = ExceptionalParams(N, 0.1, 2, strict=True)
        E = exceptional_set(p, table)
        assert all((n in E) == strict_oracle(n, N, 0.1, 2) for n in range(1, N + 1, 3))
        E0 = exceptional_set(ExceptionalParams(N, 0.1, 2), table)
        assert np.all(E0.mask <= E.mask)

    def test_one_is_exceptional(self, table):
        E = exceptional_set(ExceptionalParams(10**4, 0.1, 1), table)
        assert 1 in E and 0 not in E and 10**4 + 1 not in E

    def test_complement_and_members(self, table):
        E = exceptional_set(ExceptionalParams(10**4, 0.1, 2), table)
        assert E.size + len(E.complement()) == 10**4
        assert len(E.members()) == E.size
        assert 0 <= E.density <= 1

    def test_summary_keys(self, table):
        s = exceptional_set(ExceptionalParams(10**4, 0.1, 2), table).summary()
        assert s["N"] == 10**4 and set(s) >= {"size", "density", "lemma_budget", "spacing_budget"}

    def test_r_monotone(self, table):
        sizes = [exceptional_set(ExceptionalParams(10**4, 0.05, r), table).size for r in (1, 2, 3)]
        assert sizes == sorted(sizes)


class TestBoxes:
    def test_partition_covers_complement(self, table):
        dec = box_partition(ExceptionalParams(10**4, 0.1, 2), table)
        assert dec.covered + dec.exceptional.size == 10**4
        seen = sorted(n for b in dec.boxes for n in b.members)
        assert seen == dec.exceptional.complement().tolist()

    def test_invariants(self, table):
        for r in (1, 2, 3):
            dec = box_partition(ExceptionalParams(10**4, 0.05, r), table)
            assert dec.invariant_violations() == []

    def test_regression(self, table):
        dec = box_partition(ExceptionalParams(10**4, 0.1, 2), table)
        assert dec.box_count == 293
        assert abs(dec.box_constant() - 3.4539517015251793) < 1e-12

    def test_members_in_cells(self, table):
        p = ExceptionalParams(10**4, 0.1, 2)
        dec = box_partition(p, table)
        for b in dec.boxes:
            for n in b.members[:5]:
                ps = prime_factors_desc(n)
                for i in range(2):
                    assert dec.shrink * b.M[i] < ps[i] <= b.M[i] * (1 + 1e-12)
                assert n <= 2 * p.N

    def test_pieces_count_members(self, table):
        from pellsums.sieve import primes_between

        dec = box_partition(ExceptionalParams(10**4, 0.05, 3), table)
        for b in dec.boxes:
            total = 0
            for (lo, hi), rest, xp in dec.pieces(b):
                total += len(primes_between(lo, hi))
            assert total == b.count

    def test_needs_spacing(self):
        with pytest.raises(RangeError):
            box_partition(ExceptionalParams(100, 0.1, 2, spacing=False))


class TestPartitionIdentity:
    @pytest.mark.parametrize("a", [1, 7, 123])
    def test_exact(self, table, a):
        res = partition_sums(ExceptionalParams(10**4, 0.1, 3), 1009**2, a, table)
        assert res.residual < 1e-9 * max(1, res.direct.term_count)
        assert res.direct.term_count == 812

    def test_strict_and_r1(self, table):
        for p in (ExceptionalParams(10**4, 0.1, 2, strict=True), ExceptionalParams(10**4, 0.2, 1)):
            assert partition_sums(p, 10007, 5, table).residual < 1e-8

    def test_modulus_sharing_factors(self, table):
        res = partition_sums(ExceptionalParams(10**4, 0.1, 2), 2 * 3 * 101, 5, table)
        assert res.residual < 1e-8

    def test_not_coprime(self, table):
        with pytest.raises(NotCoprime):
            partition_sums(ExceptionalParams(10**4, 0.1, 2), 35, 7, table)
