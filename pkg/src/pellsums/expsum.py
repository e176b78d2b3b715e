"""Exponential sums with squared modular inverses.

All characters are e_q(k) = exp(2 pi i k / q) with k reduced to [0, q) before
the division, and every sum goes through :func:`char_sum`, which adds the
cosines and sines with ``math.fsum`` (correctly rounded).

Integer intervals are inclusive ``(lo, hi)`` pairs; anywhere an interval is
accepted an explicit iterable of integers also works.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import BudgetExceeded, NotCoprime, NotDivisor, NotPrime, RangeError
from .sieve import is_prime, primes_between

TWO_PI = 2.0 * math.pi
DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class SumValue:
    real_part: float
    imag_part: float
    term_count: int

    @property
    def value(self) -> complex:
        return complex(self.real_part, self.imag_part)

    def __abs__(self) -> float:
        return math.hypot(self.real_part, self.imag_part)

    @property
    def cancellation_ratio(self) -> float:
        return abs(self) / self.term_count if self.term_count else 0.0


def char_sum(residues, q: int, weights=None) -> complex:
    """sum_k w_k e_q(k); ``residues`` must already lie in [0, q)."""
    k = np.asarray(residues, dtype=np.float64)
    if k.size == 0:
        return 0j
    theta = k * (TWO_PI / q)
    c, s = np.cos(theta), np.sin(theta)
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        c, s = c * w, s * w
    return complex(math.fsum(c), math.fsum(s))


def _value(residues, q, weights=None, count=None) -> SumValue:
    z = char_sum(residues, q, weights)
    n = len(residues) if count is None else count
    return SumValue(z.real, z.imag, n)


def _members(interval) -> range | list[int]:
    if isinstance(interval, tuple) and len(interval) == 2:
        lo, hi = interval
        return range(lo, hi + 1)
    return sorted(set(int(v) for v in interval))


def mod_inverse(x: int, m: int) -> int:
    """The inverse of x modulo m as a residue in [0, m)."""
    if m < 1:
        raise RangeError(f"modulus must be positive, got {m}")
    if gcd(x, m) != 1:
        raise NotCoprime(f"gcd({x}, {m}) = {gcd(x, m)}")
    if m == 1:
        return 0
    return pow(x, -1, m)


def inverse_squares(xs, q: int) -> list[int]:
    """[x^-2 mod q for x in xs], skipping x not coprime to q."""
    return [pow(x, -2, q) if q > 1 else 0 for x in xs if gcd(x, q) == 1]


@dataclass(frozen=True)
class KloostermanQuery:
    q: int
    a: int
    N: int
    excluded: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.q < 1:
            raise RangeError(f"q must be positive, got {self.q}")
        if gcd(self.a, self.q) != 1:
            raise NotCoprime(f"gcd(a={self.a}, q={self.q}) != 1")
        if not 0 <= self.N <= self.q:
            raise RangeError(f"need 0 <= N <= q, got N={self.N}, q={self.q}")
        if not isinstance(self.excluded, frozenset):
            object.__setattr__(self, "excluded", frozenset(self.excluded or ()))


def incomplete_kloosterman_sq(query: KloostermanQuery) -> SumValue:
    """sum over 1 <= x <= N, (x, q) = 1, x not excluded, of e_q(a x^-2)."""
    q, a = query.q, query.a
    xs = [x for x in range(1, query.N + 1) if x not in query.excluded]
    ks = [a * k % q for k in inverse_squares(xs, q)]
    return _value(ks, q)


def complete_square_character_sum(q: int, a: int) -> SumValue:
    """sum_{x=1}^{q-1} e_q(a x^-2) for prime q."""
    if not is_prime(q):
        raise NotPrime(f"{q} is not prime")
    return incomplete_kloosterman_sq(KloostermanQuery(q, a, q - 1))


def multilinear_sq_sum(
    intervals,
    q: int,
    a: int,
    restrict_to_primes: bool = False,
    fixed_cofactor: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> SumValue:
    """sum over x_j in I_j (each coprime to q) of e_q(a * prod x_j^-2 * c^-2).

    The tuple distribution is built by multiplicative convolution of residue
    histograms, so the work is bounded by the number of distinct partial
    products rather than the number of tuples.
    """
    if gcd(a, q) != 1:
        raise NotCoprime(f"gcd(a={a}, q={q}) != 1")
    if not intervals:
        raise RangeError("at least one interval is required")
    start = a % q
    if fixed_cofactor is not None:
        if gcd(fixed_cofactor, q) != 1:
            raise NotCoprime(f"cofactor {fixed_cofactor} shares a factor with {q}")
        start = start * (pow(fixed_cofactor, -2, q) if q > 1 else 0) % q
    dist = {start: 1}
    terms = 1
    for iv in intervals:
        xs = _members(iv)
        if restrict_to_primes:
            xs = [x for x in xs if is_prime(x)]
        hist = Counter(inverse_squares(xs, q))
        terms *= sum(hist.values())
        if len(dist) * len(hist) > budget:
            raise BudgetExceeded(f"{len(dist) * len(hist)} residue pairs > {budget}")
        new: Counter = Counter()
        for r, c in dist.items():
            for s, d in hist.items():
                new[r * s % q] += c * d
        dist = new
        if not dist:
            break
    ks = list(dist.keys())
    return _value(ks, q, weights=list(dist.values()), count=terms)


def trilinear_restricted_sum(
    H: int,
    u1_range,
    u2_range,
    excluded_per_u2=None,
    coeffs_h=None,
    coeffs_u1=None,
    absolute: bool = True,
    coprime: bool = True,
    odd: bool = False,
):
    """Trilinear Kloosterman sum over h <= H, u1, u2 with u2^-1 taken mod u1^2.

    ``absolute=True`` returns sum_h sum_u1 |sum_u2 e(h u2^-2 / u1^2)|, the
    coefficients being ignored; otherwise the signed complex triple sum
    sum_h alpha_h sum_u1 beta_u1 sum_u2 (...) is returned.  An admissible u2
    is coprime to u1 (inverses need it), odd with u1 when ``odd`` is set, and
    not in ``excluded_per_u2``.
    """
    if H < 1:
        raise RangeError(f"H must be >= 1, got {H}")
    u1s = list(_members(u1_range))
    u2s = list(_members(u2_range))
    if odd:
        u1s = [u for u in u1s if u % 2]
    if not u1s or not u2s:
        raise RangeError("empty u1 or u2 range after filtering")
    excluded = excluded_per_u2 or frozenset()
    alphas = [1.0] * H if coeffs_h is None else [float(c) for c in coeffs_h]
    betas = [1.0] * len(u1s) if coeffs_u1 is None else [float(c) for c in coeffs_u1]
    if len(alphas) < H or len(betas) < len(u1s):
        raise RangeError("coefficient sequence shorter than its range")
    if max(map(abs, alphas[:H]), default=0) > 1 or max(map(abs, betas), default=0) > 1:
        raise RangeError("coefficients must satisfy |c| <= 1")
    total_abs = []
    total = 0j
    for j, u1 in enumerate(u1s):
        mod = u1 * u1
        admissible = [
            u2
            for u2 in u2s
            if u2 not in excluded
            and (not coprime or gcd(u2, u1) == 1)
            and (not odd or u2 % 2)
        ]
        inv2 = inverse_squares(admissible, mod)
        for h in range(1, H + 1):
            inner = char_sum([h * k % mod for k in inv2], mod)
            if absolute:
                total_abs.append(abs(inner))
            else:
                total += alphas[h - 1] * betas[j] * inner
    if absolute:
        return math.fsum(total_abs)
    return total


@dataclass(frozen=True)
class DensityMap:
    modulus: int
    counts: dict
    ell: int
    interval: tuple
    primes: tuple = ()
    signs: tuple = (1, 1)

    @property
    def l1(self) -> int:
        return sum(self.counts.values())

    @property
    def l2_squared(self) -> int:
        return sum(c * c for c in self.counts.values())

    @property
    def l2(self) -> float:
        return math.sqrt(self.l2_squared)

    @property
    def linf(self) -> int:
        return max(self.counts.values(), default=0)


def _convolve(h1: Counter, h2: Counter, q: int) -> Counter:
    out: Counter = Counter()
    for r, c in h1.items():
        for s, d in h2.items():
            out[(r + s) % q] += c * d
    return out


def mu_density(
    interval,
    ell: int,
    modulus: int,
    signs: tuple[int, int] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> DensityMap:
    """Histogram of x_1^-2 + ... + x_l^-2 - x_{l+1}^-2 - ... over prime tuples.

    ``signs = (plus, minus)`` sets how many positive and negative terms appear;
    the default is (ell, ell).
    """
    if ell < 1:
        raise RangeError(f"ell must be >= 1, got {ell}")
    if modulus < 1:
        raise RangeError(f"modulus must be positive, got {modulus}")
    plus, minus = signs if signs is not None else (ell, ell)
    lo, hi = interval
    ps = [p for p in primes_between(lo, hi) if gcd(p, modulus) == 1]
    if not ps:
        raise RangeError(f"no prime in {interval} coprime to {modulus}")
    if len(ps) ** (plus + minus) > budget:
        raise BudgetExceeded(f"{len(ps)}^{plus + minus} tuples > {budget}")
    pos = Counter(inverse_squares(ps, modulus))
    neg = Counter({(-k) % modulus: c for k, c in pos.items()})
    acc = Counter({0: 1})
    for _ in range(plus):
        acc = _convolve(acc, pos, modulus)
    for _ in range(minus):
        acc = _convolve(acc, neg, modulus)
    return DensityMap(modulus, dict(sorted(acc.items())), ell, (lo, hi), tuple(ps), (plus, minus))


def subprogression_mass(density: DensityMap, q1: int) -> float:
    """max over xi mod q1 of the mu-mass on z = xi (mod q1), divided by the total mass."""
    if q1 < 1 or density.modulus % q1:
        raise NotDivisor(f"{q1} does not divide {density.modulus}")
    fibers: Counter = Counter()
    for z, c in density.counts.items():
        fibers[z % q1] += c
    return max(fibers.values()) / density.l1


def subprogression_check(density: DensityMap, q1: int) -> tuple[float, float, bool]:
    """(mass, q1^(-1/8), mass < q1^(-1/8))."""
    mass = subprogression_mass(density, q1)
    thr = q1 ** (-1 / 8)
    return mass, thr, mass < thr
