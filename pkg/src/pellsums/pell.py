"""Fundamental solutions of t^2 - D u^2 = 1 and the counts S^f(x, alpha), S(x, alpha).

The fundamental unit is read off the continued fraction of sqrt(D).  With the
usual recurrence ``m' = d a - m, d' = (D - m'^2)/d`` the k-th convergent
``p_k / q_k`` satisfies ``p_k^2 - D q_k^2 = (-1)^(k+1) d_{k+1}``, so the end of
each period (``d == 1``) is detected without squaring big integers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import mpmath

from ._exact import MAX_DENOMINATOR, rational_exponent
from .errors import RangeError, SquareInput

#: relative guard band for log-space comparisons; closer calls are decided exactly
GUARD = 1e-9


@dataclass(frozen=True)
class PellSolution:
    D: int
    t: int
    u: int
    eps_log: float

    def check(self) -> bool:
        return self.t * self.t - self.D * self.u * self.u == 1

    def square(self) -> tuple[int, int]:
        """(t, u) of eps_D^2, from the group law."""
        return 2 * self.t * self.t - 1, 2 * self.t * self.u


@dataclass(frozen=True)
class SolutionCount:
    x: int
    alpha: float
    count_fundamental: int
    count_all_powers: int
    main_term: float

    @property
    def ratio(self) -> float:
        return self.count_fundamental / self.main_term if self.main_term else math.nan


def _validate_D(D) -> int:
    if isinstance(D, bool) or not isinstance(D, int):
        raise TypeError(f"D must be an int, got {type(D).__name__}")
    if D < 2:
        raise RangeError(f"D must be >= 2, got {D}")
    r = isqrt(D)
    if r * r == D:
        raise SquareInput(f"D = {D} is a perfect square")
    return D


def unit_log(D: int, t: int, u: int) -> float:
    """log(t + u sqrt(D)) without overflowing for huge t."""
    return math.log(t) + math.log1p(math.sqrt(D) * (u / t))


def _cf_unit(D: int, bound: float | None = None) -> tuple[int, int] | None:
    """Walk the continued fraction of sqrt(D) until the fundamental unit.

    With ``bound`` set, give up (return None) as soon as a convergent numerator
    exceeds it: every later convergent, and eps_D itself, is larger still.
    """
    a0 = isqrt(D)
    m, d, a = 0, 1, a0
    p0, p1 = 1, a0
    q0, q1 = 0, 1
    k = 0
    while True:
        if bound is not None and p1 > bound:
            return None
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        if d == 1 and k % 2 == 1:
            return p1, q1
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        k += 1


def fundamental_solution(D: int) -> PellSolution:
    """Minimal positive (t, u) with t^2 - D u^2 = 1."""
    D = _validate_D(D)
    t, u = _cf_unit(D)
    return PellSolution(D, t, u, unit_log(D, t, u))


def _zsqrt_pow(t: int, u: int, D: int, n: int) -> tuple[int, int]:
    """(t + u sqrt D)^n in Z[sqrt D]."""
    rt, ru = 1, 0
    bt, bu = t, u
    while n:
        if n & 1:
            rt, ru = rt * bt + D * ru * bu, rt * bu + ru * bt
        bt, bu = bt * bt + D * bu * bu, 2 * bt * bu
        n >>= 1
    return rt, ru


def power_within(t: int, u: int, D: int, n: int, alpha) -> bool:
    """Exact test of (t + u sqrt D)^n <= D^(1/2 + alpha)."""
    e = rational_exponent(alpha) + Fraction(1, 2)
    if e <= 0:
        return False
    if e.denominator <= MAX_DENOMINATOR and n * e.denominator <= 4096:
        # eps^(n b) <= D^a  with e = a/b;  T + U sqrt D <= R  <=>  U^2 D <= R^2
        T, U = _zsqrt_pow(t, u, D, n * e.denominator)
        R = D**e.numerator - T
        return R >= 0 and U * U * D <= R * R
    with mpmath.workdps(60):
        lhs = n * mpmath.log(t + u * mpmath.sqrt(D))
        rhs = mpmath.mpf(e.numerator) / e.denominator * mpmath.log(D)
        return bool(lhs <= rhs)


def _powers_within(D: int, t: int, u: int, alpha, log_bound: float) -> int:
    """Number of n >= 1 with eps_D^n <= D^(1/2 + alpha)."""
    le = unit_log(D, t, u)
    n = 0
    while True:
        diff = (n + 1) * le - log_bound
        if diff < -GUARD * log_bound:
            n += 1
        elif diff > GUARD * log_bound:
            return n
        elif power_within(t, u, D, n + 1, alpha):
            n += 1
        else:
            return n


def _count_block(args) -> tuple[int, int]:
    lo, hi, alpha = args
    e = 0.5 + float(alpha)
    fund = total = 0
    r = isqrt(lo)
    for D in range(lo, hi + 1):
        if r * r < D and (r + 1) * (r + 1) <= D:
            r += 1
        if r * r == D:
            continue
        log_bound = e * math.log(D)
        sol = _cf_unit(D, math.exp(log_bound) * (1 + GUARD) + 1)
        if sol is None:
            continue
        k = _powers_within(D, sol[0], sol[1], alpha, log_bound)
        if k:
            fund += 1
            total += k
    return fund, total


def _blocks(x: int, nblocks: int) -> list[tuple[int, int]]:
    n = x - 1
    step = -(-n // nblocks)
    return [(lo, min(lo + step - 1, x)) for lo in range(2, x + 1, step)]


def count_pairs(x: int, alpha, workers: int = 1) -> tuple[int, int]:
    """(S^f(x, alpha), S(x, alpha)) by direct counting over 2 <= D <= x."""
    if x < 2:
        return 0, 0
    if float(alpha) <= -0.5:
        return 0, 0
    nblocks = max(1, workers) * 4 if workers > 1 else 1
    jobs = [(lo, hi, alpha) for lo, hi in _blocks(x, nblocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_block, jobs))
    else:
        parts = [_count_block(j) for j in jobs]
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def hooley_main_term(x: int, alpha: float) -> float:
    """Predicted size of S^f(x, alpha): 4 alpha^2/pi^2 below 1/2, B(alpha) above."""
    from .fouvry import b_coefficient

    return b_coefficient(alpha) * math.sqrt(x) * math.log(x) ** 2


def count_solutions(x: int, alpha, workers: int = 1) -> SolutionCount:
    """Count D <= x whose fundamental unit (and its powers) lie below D^(1/2 + alpha).

    Only positive powers eps_D^n, n >= 1, are counted in ``count_all_powers``.
    """
    if x < 2:
        raise RangeError(f"x must be >= 2, got {x}")
    if not alpha > 0:
        raise RangeError(f"alpha must be > 0, got {alpha}")
    fund, total = count_pairs(x, alpha, workers)
    return SolutionCount(x, alpha, fund, total, hooley_main_term(x, float(alpha)))


@dataclass(frozen=True)
class PowerIdentityReport:
    x: int
    alpha: float
    S: int
    S_f: int
    shifted_half: float
    shifted_quarter: float
    S_shift_half: int
    S_shift_quarter: int

    @property
    def residual_half(self) -> int:
        """S - S^f - S(x, alpha/2 - 1/2)."""
        return self.S - self.S_f - self.S_shift_half

    @property
    def residual_quarter(self) -> int:
        """S - S^f - S(x, alpha/2 - 1/4)."""
        return self.S - self.S_f - self.S_shift_quarter


def _S(x: int, alpha) -> int:
    # eps_D > 2 sqrt(D), so the defining set is empty for alpha <= 0
    if float(alpha) <= 0:
        return 0
    return count_pairs(x, alpha)[1]


def check_power_identity(x: int, alpha, workers: int = 1) -> PowerIdentityReport:
    """Residuals of S = S^f + S(shifted) for the shifts alpha/2 - 1/2 and alpha/2 - 1/4."""
    if x < 2:
        raise RangeError(f"x must be >= 2, got {x}")
    if not 0 <= float(alpha) <= 1.5:
        raise RangeError(f"alpha must lie in [0, 3/2], got {alpha}")
    a = rational_exponent(alpha)
    if float(alpha) > 0:
        S_f, S = count_pairs(x, alpha, workers)
    else:
        S_f = S = 0
    sh = a / 2 - Fraction(1, 2)
    sq = a / 2 - Fraction(1, 4)
    return PowerIdentityReport(
        x, float(alpha), S, S_f, float(sh), float(sq), _S(x, sh), _S(x, sq)
    )
