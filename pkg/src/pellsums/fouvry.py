"""Lattice objects behind the lower bounds for S^f(x, alpha).

Square roots of unity R(u) modulo u^2, the residue Phi(u1, u2), the range
parameters X_alpha, Y_2, Y_3, the admissible region and its main term, the
deficit caused by deleting exceptional u2, and the Hooley/Fouvry
coefficient formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd

from scipy.special import digamma

from ._exact import ceil_power, floor_power, iroot, rational_exponent
from .errors import BudgetExceeded, NotCoprime, RangeError
from .expsum import trilinear_restricted_sum
from .factor import ExceptionalParams, exceptional_set
from .sieve import factorint

PI2 = math.pi**2


# -- coefficients -----------------------------------------------------------


def _b_branches(alpha: float) -> dict[str, float]:
    base = 4 / PI2 * (alpha - 0.25)
    return {
        "low": base,
        "mid": base + (alpha - 1) ** 2 / (18 * PI2),
        "high": base + (alpha - 1.75) / (6 * PI2),
    }


def b_coefficient(alpha: float) -> float:
    """Leading coefficient of the conjectured S^f(x, alpha) ~ B x^(1/2) (log x)^2.

    For alpha <= 1/2 this is Hooley's 4 alpha^2 / pi^2.
    """
    if alpha <= 0:
        raise RangeError(f"alpha must be > 0, got {alpha}")
    if alpha <= 0.5:
        return 4 * alpha * alpha / PI2
    br = _b_branches(alpha)
    if alpha <= 1:
        return br["low"]
    if alpha <= 2.5:
        return br["mid"]
    return br["high"]


@dataclass(frozen=True)
class HooleyCoefficients:
    alpha: float
    B_alpha: float
    branches: dict
    hooley_factor: float
    fouvry_lower_06: float
    fouvry_lower_319: float
    conjectured_linear: float
    fouvry_range: bool
    delta_exponent_claim: dict = field(default_factory=dict)

    @property
    def lower_bound_gap(self) -> float:
        """fouvry_lower_319 - fouvry_lower_06 (zero only at alpha = 1/2)."""
        return self.fouvry_lower_319 - self.fouvry_lower_06


def coefficient_table(alpha: float) -> HooleyCoefficients:
    """Every coefficient formula evaluated at alpha; branch formulas are evaluated even off-range."""
    if alpha <= 0:
        raise RangeError(f"alpha must be > 0, got {alpha}")
    d = alpha - 0.5
    return HooleyCoefficients(
        alpha=alpha,
        B_alpha=b_coefficient(alpha),
        branches=_b_branches(alpha),
        hooley_factor=4 * alpha * alpha / PI2,
        fouvry_lower_06=(1 + (2 * alpha - 1) * (3 - 2 * alpha)) / PI2,
        fouvry_lower_319=(1 + d * (5.5 - 3 * alpha)) / PI2,
        conjectured_linear=(1 + 4 * d) / PI2,
        fouvry_range=0.5 <= alpha <= 1,
        delta_exponent_claim={
            "form": "delta(alpha) = O((alpha - 1/2)^(2 + c))",
            "previous": "O((alpha - 1/2)^2)",
            "c": "unspecified absolute constant > 0",
            "gap_to_linear_06": (1 + 4 * d) / PI2 - (1 + (2 * alpha - 1) * (3 - 2 * alpha)) / PI2,
        },
    )


# -- R(u) and Phi -----------------------------------------------------------

SCAN_LIMIT = 10**7


def _roots_prime_power(p: int, k: int) -> list[int]:
    """Solutions of w^2 = 1 mod p^k."""
    m = p**k
    if p != 2:
        return sorted({1 % m, (m - 1) % m})
    if k == 1:
        return [1]
    if k == 2:
        return [1, 3]
    h = m // 2
    return sorted({1, m - 1, h - 1, h + 1})


def _crt_combine(residues: list[int], m1: int, roots: list[int], m2: int) -> list[int]:
    inv = pow(m1, -1, m2)
    out = []
    for r1 in residues:
        for r2 in roots:
            t = (r2 - r1) * inv % m2
            out.append(r1 + m1 * t)
    return out


def sqrt_one_residues(u: int, mode: str = "auto", budget: int = SCAN_LIMIT) -> list[int]:
    """R(u): sorted residues w mod u^2 with w^2 = 1 (mod u^2)."""
    if u < 1:
        raise RangeError(f"u must be >= 1, got {u}")
    m = u * u
    if mode == "auto":
        mode = "scan" if m <= 10**4 else "crt"
    if mode == "scan":
        if m > budget:
            raise BudgetExceeded(f"scan over {m} residues > {budget}")
        return [w for w in range(m) if (w * w - 1) % m == 0]
    if mode != "crt":
        raise ValueError(f"unknown mode {mode!r}")
    if u == 1:
        return [0]
    res, mod = [0], 1
    for p, e in sorted(factorint(u).items()):
        pk = p ** (2 * e)
        res = _crt_combine(res, mod, _roots_prime_power(p, 2 * e), pk)
        mod *= pk
    return sorted(r % mod for r in res)


def phi_pair(u1: int, u2: int) -> int:
    """-(u1^-1 mod u2^2)^2 u1^2 + (u2^-1 mod u1^2)^2 u2^2, reduced mod (u1 u2)^2."""
    if u1 < 2 or u2 < 2:
        raise RangeError(f"need u1, u2 >= 2, got ({u1}, {u2})")
    if gcd(u1, u2) != 1:
        raise NotCoprime(f"gcd({u1}, {u2}) != 1")
    m1, m2 = u1 * u1, u2 * u2
    i1 = pow(u1, -1, m2)
    i2 = pow(u2, -1, m1)
    return (-i1 * i1 * m1 + i2 * i2 * m2) % (m1 * m2)


# -- range parameters -------------------------------------------------------


@dataclass(frozen=True)
class RangeParameters:
    X_alpha: float
    Y2: float
    Y3: float
    approximate: bool = True  # Y2 is only defined up to ~


def range_parameters(x: int, alpha: float, u: int) -> RangeParameters:
    if x < 2 or alpha <= 0 or u < 1:
        raise RangeError(f"need x >= 2, alpha > 0, u >= 1; got ({x}, {alpha}, {u})")
    X = 0.5 * (x**alpha - x ** (-1 - alpha))
    Y2 = 2 ** (1 / (2 * alpha)) * u ** (1 + 1 / (2 * alpha))
    return RangeParameters(X, Y2, u * math.sqrt(x))


# -- admissible region ------------------------------------------------------

MAIN_TERM_X_LIMIT = 10**10
_DIRECT_HARMONIC = 10**5


def _harmonic(lo: int, hi: int) -> float:
    """sum_{n=lo}^{hi} 1/n."""
    if hi < lo:
        return 0.0
    if hi - lo < _DIRECT_HARMONIC:
        return math.fsum(1.0 / n for n in range(lo, hi + 1))
    return float(digamma(hi + 1) - digamma(lo))


def _squarefree_divisors(n: int) -> list[tuple[int, int]]:
    """(d, mu(d)) over the squarefree divisors of n."""
    out = [(1, 1)]
    for p in factorint(n):
        out += [(d * p, -m) for d, m in out]
    return out


def _coprime_harmonic(lo: int, hi: int, modulus: int) -> float:
    """sum 1/n over lo <= n <= hi with gcd(n, modulus) = 1, by Mobius inversion."""
    if hi < lo:
        return 0.0
    terms = []
    for d, mu in _squarefree_divisors(modulus):
        terms.append(mu / d * _harmonic(-(-lo // d), hi // d))
    return math.fsum(terms)


def admissible_u2_range(x: int, alpha, u1: int) -> tuple[int, int]:
    """Integer range of u2 with x^(1/2)/u1 <= u2 <= min(x^alpha/u1, x^(1/2) u1)."""
    lo = _ceil_sqrt_div(x, u1)
    hi = min(floor_power(x, alpha) // u1, math.isqrt(x * u1 * u1))
    return lo, hi


def _ceil_sqrt_div(x: int, u1: int) -> int:
    """Least integer v with (v u1)^2 >= x."""
    v = math.isqrt(x // (u1 * u1)) if u1 * u1 <= x else 0
    while (v * u1) ** 2 < x:
        v += 1
    while v > 0 and ((v - 1) * u1) ** 2 >= x:
        v -= 1
    return max(v, 1)


def admissible_main_term(x: int, alpha) -> float:
    """8 sqrt(x) * sum over the admissible region, (u1, u2) = (u1 u2, 2) = 1, of 1/(u1 u2)."""
    if x < 2 or float(alpha) <= 0:
        raise RangeError(f"need x >= 2 and alpha > 0; got ({x}, {alpha})")
    if x > MAIN_TERM_X_LIMIT:
        raise BudgetExceeded(f"x = {x} exceeds {MAIN_TERM_X_LIMIT}")
    total = []
    for u1 in range(1, iroot(x, 4) + 1, 2):
        lo, hi = admissible_u2_range(x, alpha, u1)
        s = _coprime_harmonic(lo, hi, 2 * u1)
        if s:
            total.append(s / u1)
    return 8 * math.sqrt(x) * math.fsum(total)


# -- excluded range ---------------------------------------------------------


@dataclass(frozen=True)
class DeficitReport:
    x: int
    alpha: float
    beta: float
    r: int
    deficit: float
    u1_range: tuple[int, int]
    scales: tuple[int, ...]
    exceptional_counts: tuple[int, ...]
    reference: float  # (alpha - 1/2)^2 beta x^(1/2) (log x)^2, without the (log 1/beta)^C factor
    C: float
    ratio: float
    fitted_C: float | None


def excluded_deficit(x: int, alpha, beta: float, r: int, C: float | None = None) -> DeficitReport:
    """Main-term mass removed when u2 in E(U2) is deleted from the range u1 > x^(1/4).

    E(U2) is the exceptional set of {1..2 U2} restricted to U2 < u2 <= 2 U2,
    over dyadic U2 = 2^j with x^(1/4) < U2 < x^(alpha - 1/4).  ``C`` defaults
    to r; ``fitted_C`` solves ratio = 1 for C.
    """
    if x < 16 or float(alpha) < 0.5:
        raise RangeError(f"need x >= 16 and alpha >= 1/2; got ({x}, {alpha})")
    if x > MAIN_TERM_X_LIMIT:
        raise BudgetExceeded(f"x = {x} exceeds {MAIN_TERM_X_LIMIT}")
    a = rational_exponent(alpha)
    u1_lo = iroot(x, 4) + 1
    u1_hi = ceil_power(x, a / 2) - 1  # strict upper limit
    lo_scale = iroot(x, 4)
    hi_scale = ceil_power(x, a - rational_exponent(0.25))
    scales = []
    U = 1
    while U < hi_scale:
        if U > lo_scale:
            scales.append(U)
        U *= 2
    counts = []
    e_mass = []
    for U in scales:
        E = exceptional_set(ExceptionalParams(2 * U, beta, r))
        mem = [int(n) for n in E.members() if n > U]
        counts.append(len(mem))
        e_mass.append(math.fsum(1.0 / n for n in mem))
    u1_mass = _harmonic(u1_lo, u1_hi)
    deficit = math.sqrt(x) * u1_mass * math.fsum(e_mass)
    C = float(r) if C is None else float(C)
    L = math.log(1 / beta)
    ref = (float(alpha) - 0.5) ** 2 * beta * math.sqrt(x) * math.log(x) ** 2
    ratio = deficit / (ref * L**C) if ref > 0 else 0.0
    fitted = None
    if deficit > 0 and ref > 0 and L != 1:
        fitted = math.log(deficit / ref) / math.log(L)
    return DeficitReport(
        x, float(alpha), beta, r, deficit, (u1_lo, u1_hi), tuple(scales), tuple(counts), ref, C, ratio, fitted
    )


# -- restricted sums --------------------------------------------------------


@dataclass(frozen=True)
class ProbeRow:
    h: int
    u1: int
    inner_abs: float
    admissible: int
    ratio_scale: float  # |inner| / U2
    ratio_count: float  # |inner| / #admissible
    gcd_shape: float  # (h, u1^2) / U2


@dataclass(frozen=True)
class ProbeReport:
    U1: tuple[int, int]
    U2: tuple[int, int]
    beta: float
    r: int
    excluded: int
    total: float
    rows: tuple[ProbeRow, ...]


def restricted_bound_probe(
    U1: tuple[int, int], U2: tuple[int, int], beta: float, r: int, h_max: int, excluded=None
) -> ProbeReport:
    """Scatter of |sum_{u2 ~ U2, u2 not in E} e(h u2^-2 / u1^2)| against (h, u1^2)/U2.

    E defaults to the exceptional set of {1..max U2} with parameters (beta, r);
    ``excluded`` overrides it.
    """
    if h_max < 1:
        raise RangeError("h_max must be >= 1")
    lo2, hi2 = U2
    if excluded is None:
        E = exceptional_set(ExceptionalParams(hi2, beta, r))
        excluded = frozenset(int(n) for n in E.members() if n >= lo2)
    else:
        excluded = frozenset(excluded)
    rows = []
    for u1 in range(U1[0], U1[1] + 1):
        adm = sum(1 for u2 in range(lo2, hi2 + 1) if u2 not in excluded and gcd(u2, u1) == 1)
        for h in range(1, h_max + 1):
            coeffs = [0.0] * (h - 1) + [1.0]
            val = trilinear_restricted_sum(h, (u1, u1), U2, excluded, coeffs_h=coeffs, absolute=False)
            mag = abs(val)
            rows.append(
                ProbeRow(h, u1, mag, adm, mag / hi2, mag / adm if adm else 0.0, gcd(h, u1 * u1) / hi2)
            )
    total = trilinear_restricted_sum(h_max, U1, U2, excluded)
    return ProbeReport(tuple(U1), tuple(U2), beta, r, len(excluded), total, tuple(rows))
