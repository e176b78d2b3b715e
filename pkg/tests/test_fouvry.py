import math
from fractions import Fraction
from math import gcd

import pytest

from pellsums.errors import BudgetExceeded, NotCoprime, RangeError
from pellsums.fouvry import (
    admissible_main_term,
    admissible_u2_range,
    b_coefficient,
    coefficient_table,
    excluded_deficit,
    phi_pair,
    range_parameters,
    restricted_bound_probe,
    sqrt_one_residues,
)

PI2 = math.pi**2


class TestCoefficients:
    def test_half(self):
        assert abs(b_coefficient(0.5) - 1 / PI2) < 1e-15
        t = coefficient_table(0.5)
        assert abs(t.fouvry_lower_06 - 1 / PI2) < 1e-15
        assert abs(t.fouvry_lower_319 - 1 / PI2) < 1e-15
        assert t.lower_bound_gap == 0

    def test_continuity(self):
        br1 = coefficient_table(1.0).branches
        assert abs(br1["low"] - 3 / PI2) < 1e-12 and abs(br1["mid"] - 3 / PI2) < 1e-12
        br = coefficient_table(2.5).branches
        assert abs(br["mid"] - br["high"]) < 1e-12
        assert abs(br["mid"] - (9 / PI2 + 1 / (8 * PI2))) < 1e-12
        for a in (1.0, 2.5):
            assert abs(b_coefficient(a) - b_coefficient(a + 1e-13)) < 1e-12

    def test_hooley_branch(self):
        for a in (0.1, 0.25, 0.4):
            assert b_coefficient(a) == 4 * a * a / PI2

    def test_discrepancy_at_one(self):
        t = coefficient_table(1.0)
        assert abs(t.fouvry_lower_06 - 2 / PI2) < 1e-15
        assert abs(t.fouvry_lower_319 - 2.25 / PI2) < 1e-15
        assert t.lower_bound_gap > 0

    def test_rejects(self):
        with pytest.raises(RangeError):
            coefficient_table(0)
        with pytest.raises(RangeError):
            b_coefficient(-1)


def brute_roots(u):
    m = u * u
    return [w for w in range(m) if (w * w) % m == 1 % m]


class TestRoots:
    @pytest.mark.parametrize("u, roots", [(1, [0]), (3, [1, 8])])
    def test_examples(self, u, roots):
        assert sqrt_one_residues(u) == roots
        assert sqrt_one_residues(u, mode="crt") == roots

    def test_twelve(self):
        assert len(sqrt_one_residues(12)) == 8

    def test_scan_crt_brute_agree(self):
        for u in range(1, 101):
            scan = sqrt_one_residues(u, mode="scan")
            assert scan == brute_roots(u)
            assert sqrt_one_residues(u, mode="crt") == scan

    def test_large_crt(self):
        u = 2**5 * 3 * 7 * 101 * 10007
        rs = sqrt_one_residues(u)
        assert len(rs) == 4 * 2**4
        assert all(w * w % (u * u) == 1 for w in rs)

    def test_errors(self):
        with pytest.raises(RangeError):
            sqrt_one_residues(0)
        with pytest.raises(BudgetExceeded):
            sqrt_one_residues(10**4, mode="scan")
        with pytest.raises(ValueError):
            sqrt_one_residues(5, mode="fast")


class TestPhi:
    @pytest.mark.parametrize("u1, u2, v", [(2, 3, 17), (3, 2, 19), (2, 5, 49)])
    def test_examples(self, u1, u2, v):
        assert phi_pair(u1, u2) == v

    def test_contract(self):
        for u1 in range(2, 61):
            for u2 in range(2, 61):
                if gcd(u1, u2) != 1:
                    continue
                f = phi_pair(u1, u2)
                m1, m2 = u1 * u1, u2 * u2
                assert f % m1 == 1 % m1
                assert f % m2 == m2 - 1
                assert f * f % (m1 * m2) == 1

    def test_in_roots(self):
        for u1, u2 in [(2, 3), (4, 9), (5, 12), (7, 10)]:
            assert phi_pair(u1, u2) in sqrt_one_residues(u1 * u2)

    def test_errors(self):
        with pytest.raises(NotCoprime):
            phi_pair(4, 6)
        with pytest.raises(RangeError):
            phi_pair(1, 5)


class TestRangeParameters:
    def test_example(self):
        p = range_parameters(100, 0.5, 1)
        assert abs(p.X_alpha - 4.9995) < 1e-12
        assert abs(p.Y2 - 2) < 1e-12
        assert abs(p.Y3 - 10) < 1e-12
        assert p.approximate

    def test_scaling(self):
        for u in (1, 3, 17):
            assert range_parameters(1000, 0.7, 2 * u).Y3 == 2 * range_parameters(1000, 0.7, u).Y3

    def test_asymptotic(self):
        for x in (100, 10**4, 10**6):
            for a in (0.5, 0.8, 1.5):
                X = range_parameters(x, a, 1).X_alpha
                assert abs(X / (x**a / 2) - 1) < 1e-3

    def test_rejects(self):
        with pytest.raises(RangeError):
            range_parameters(1, 0.5, 1)


def brute_main_term(x, num, den):
    """8 sqrt x * sum 1/(u1 u2) with alpha = num/den, by exact integer tests."""
    total = Fraction(0)
    u1 = 1
    while u1**4 <= x:
        u2 = 1
        while u2 * u2 <= x * u1 * u1:
            n = u1 * u2
            if (
                n * n >= x
                and n ** den <= x**num
                and gcd(u1, u2) == 1
                and n % 2 == 1
            ):
                total += Fraction(1, n)
            u2 += 1
        u1 += 1
    return 8 * math.sqrt(x) * float(total)


class TestMainTerm:
    def test_x16(self):
        assert admissible_main_term(16, 0.5) == 0

    @pytest.mark.parametrize("x, num, den", [(10**4, 3, 5), (5000, 3, 4), (20000, 1, 2), (9999, 7, 10)])
    def test_against_double_loop(self, x, num, den):
        got = admissible_main_term(x, Fraction(num, den))
        ref = brute_main_term(x, num, den)
        assert abs(got - ref) < 1e-9 * max(1, ref)

    def test_monotone(self):
        vals = [admissible_main_term(10**5, a) for a in (0.5, 0.6, 0.75, 1.0)]
        assert vals == sorted(vals)

    def test_regression(self):
        assert abs(admissible_main_term(10**6, 0.6) - 5893.94338266209) < 1e-6

    def test_u2_range(self):
        lo, hi = admissible_u2_range(10**4, 0.5, 3)
        assert (lo, hi) == (34, 33)

    def test_guards(self):
        with pytest.raises(RangeError):
            admissible_main_term(1, 0.5)
        with pytest.raises(BudgetExceeded):
            admissible_main_term(10**11, 0.6)


class TestDeficit:
    def test_half_is_zero(self):
        rep = excluded_deficit(10**6, 0.5, 0.05, 3)
        assert rep.deficit == 0 and rep.ratio == 0

    def test_monotone_in_beta(self):
        ds = [excluded_deficit(10**6, 0.6, b, 2).deficit for b in (0.02, 0.05, 0.1, 0.2)]
        assert ds == sorted(ds)

    def test_regression(self):
        rep = excluded_deficit(10**6, 0.55, 0.05, 3)
        assert abs(rep.deficit - 236.7909876254391) < 1e-8
        assert rep.scales == (32,)
        assert rep.u1_range == (32, 44)
        assert rep.C == 3.0
        L = math.log(20)
        assert abs(rep.reference * L**rep.fitted_C - rep.deficit) < 1e-8

    def test_rejects(self):
        with pytest.raises(RangeError):
            excluded_deficit(10**6, 0.4, 0.05, 3)


class TestProbe:
    def test_all_excluded(self):
        rep = restricted_bound_probe((5, 7), (10, 20), 0.05, 2, 3, excluded=range(10, 21))
        assert rep.total == 0
        assert all(row.inner_abs == 0 for row in rep.rows)

    def test_h_multiple_of_square(self):
        rep = restricted_bound_probe((3, 3), (10, 40), 0.05, 2, 18, excluded=[])
        row = next(r for r in rep.rows if r.h == 9)
        assert abs(row.ratio_count - 1) < 1e-12
        row18 = next(r for r in rep.rows if r.h == 18)
        assert abs(row18.ratio_count - 1) < 1e-12

    def test_regression(self):
        rep = restricted_bound_probe((30, 60), (60, 120), 0.05, 2, 10)
        assert abs(rep.total - 878.0672222363203) < 1e-8
        assert len(rep.rows) == 31 * 10
        assert all(r.inner_abs <= r.admissible + 1e-9 for r in rep.rows)

    def test_rejects(self):
        with pytest.raises(RangeError):
            restricted_bound_probe((3, 3), (10, 40), 0.05, 2, 0)
