"""Amplification bookkeeping for multilinear sums with squared prime inverses.

Choice of the Holder exponents ell_i, exact enumeration of the rational
equation 1/x_1^2 + ... + 1/x_l^2 = 1/x_{l+1}^2 + ... + 1/x_{2l}^2, the
Holder inequality checked numerically, and the measured cancellation of
the sum over non-exceptional x.
"""
from __future__ import annotations

import itertools
import math
import random
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import BudgetExceeded, NotCoprime, RangeError
from .expsum import DEFAULT_BUDGET, DensityMap, char_sum, inverse_squares, mu_density, multilinear_sq_sum
from .factor import ExceptionalParams, exceptional_set
from .sieve import primes_between

DEFAULT_SEED = 20240917


def choose_ell(beta_i: float) -> int:
    """Smallest ell >= 1 with 1 <= beta_i (8 ell + 6).

    For ell > 1 minimality gives beta_i (8 ell - 2) < 1 as well, since that is
    the right-hand side at ell - 1.  For beta_i >= 1/6 no positive ell meets
    the left inequality and 1 is returned.
    """
    if not 0 < beta_i <= 1:
        raise RangeError(f"beta_i must lie in (0, 1], got {beta_i}")
    ell = max(1, math.ceil((1 / beta_i - 6) / 8))
    while beta_i * (8 * ell + 6) < 1:
        ell += 1
    while ell > 1 and beta_i * (8 * (ell - 1) + 6) >= 1:
        ell -= 1
    return ell


def ell_conditions(beta_i: float, ell: int) -> tuple[bool, bool]:
    """(beta_i (8 ell - 2) < 1, 1 <= beta_i (8 ell + 6))."""
    return beta_i * (8 * ell - 2) < 1, 1 <= beta_i * (8 * ell + 6)


# -- rational equation --------------------------------------------------------


@dataclass(frozen=True)
class Lemma2Instance:
    ell: int
    prime_sets: tuple[tuple[int, ...], ...]
    solutions: int
    matched: int
    bound: float

    @property
    def dichotomy_holds(self) -> bool:
        return self.solutions == self.matched

    @property
    def below_bound(self) -> bool:
        return self.solutions < self.bound


def lemma2_enumerate(
    ell: int, prime_sets, scales=None, budget: int = DEFAULT_BUDGET
) -> Lemma2Instance:
    """Count 2l-tuples with 1/x_1^2 + ... + 1/x_l^2 = 1/x_{l+1}^2 + ... + 1/x_{2l}^2.

    x_i and x_{i+l} both range over ``prime_sets[i]``.  ``matched`` counts the
    solutions whose halves agree as multisets.  ``scales`` are the M_i of the
    bound (2l)^l prod M_i / log M_i, defaulting to max(prime_sets[i]).
    """
    if ell < 1:
        raise RangeError(f"ell must be >= 1, got {ell}")
    sets = tuple(tuple(sorted(set(int(p) for p in s))) for s in prime_sets)
    if len(sets) != ell or any(not s for s in sets):
        raise RangeError(f"need {ell} nonempty prime sets, got {len(sets)}")
    size = math.prod(len(s) for s in sets)
    if size * size > budget:
        raise BudgetExceeded(f"{size}^2 tuples > {budget}")
    # value -> multiset -> number of ordered half-tuples
    halves: dict[Fraction, Counter] = defaultdict(Counter)
    for tup in itertools.product(*sets):
        val = sum((Fraction(1, x * x) for x in tup), Fraction(0))
        halves[val][tuple(sorted(tup))] += 1
    solutions = matched = 0
    for by_ms in halves.values():
        n = sum(by_ms.values())
        solutions += n * n
        matched += sum(c * c for c in by_ms.values())
    M = [max(s) for s in sets] if scales is None else list(scales)
    bound = (2 * ell) ** ell * math.prod(m / math.log(m) for m in M)
    return Lemma2Instance(ell, sets, solutions, matched, bound)


# -- Holder amplification -----------------------------------------------------


@dataclass(frozen=True)
class AmplificationPlan:
    q: int
    rho: float
    beta: float
    r: int
    beta_i: tuple[float, ...]
    ell_i: tuple[int, ...]

    def violations(self) -> list[str]:
        out = []
        for i, (b, l) in enumerate(zip(self.beta_i, self.ell_i), 1):
            if b < self.rho * self.beta:
                out.append(f"beta_{i} = {b:.6g} < rho * beta")
            left, right = ell_conditions(b, l)
            if not left:
                out.append(f"beta_{i} (8 ell_{i} - 2) >= 1")
            if not right:
                out.append(f"beta_{i} (8 ell_{i} + 6) < 1")
            if l < math.ceil(1 / (14 * b)) - 1:
                out.append(f"ell_{i} < ceil(1 / (14 beta_{i})) - 1")
        return out


def make_plan(q: int, intervals, rho: float, beta: float) -> AmplificationPlan:
    """Plan with M_i = top of interval i, beta_i = log(2 M_i) / log q, ell_i = choose_ell(beta_i)."""
    if q < 3:
        raise RangeError(f"q must be >= 3, got {q}")
    betas = tuple(min(1.0, math.log(2 * hi) / math.log(q)) for _, hi in intervals)
    return AmplificationPlan(q, rho, beta, len(intervals), betas, tuple(choose_ell(b) for b in betas))


def _density_sum(densities: list[DensityMap], q: int, a: int, budget: int) -> complex:
    """sum over z_1..z_r of mu_1(z_1) ... mu_r(z_r) e_q(a z_1 ... z_r)."""
    dist = {a % q: 1}
    for mu in densities[:-1]:
        if len(dist) * len(mu.counts) > budget:
            raise BudgetExceeded("density product support exceeds budget")
        new: Counter = Counter()
        for w, c in dist.items():
            for z, m in mu.counts.items():
                new[w * z % q] += c * m
        dist = new
    last = densities[-1].counts
    if len(dist) * len(last) > budget:
        raise BudgetExceeded("density product support exceeds budget")
    zs = np.array(list(last.keys()), dtype=object)
    ms = list(last.values())
    parts = []
    for w, c in dist.items():
        ks = [int(v) for v in (zs * w) % q]
        parts.append(c * char_sum(ks, q, ms))
    return complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))


@dataclass(frozen=True)
class DensityCheck:
    interval: tuple[int, int]
    ell: int
    primes: int
    M_tilde_proxy: float  # M / log M
    l1: int
    l2_squared: int
    linf: int
    l2_bound: float  # (4 ell)^(2 ell) * primes^(2 ell)
    l2_ok: bool
    congruence_lifts: bool  # 2 ell M^(8 ell - 2) < q
    linf_threshold: float  # q^(-1/8) * l1
    linf_ok: bool
    linf_applicable: bool  # beta_i (8 ell_i - 2) < 1
    mass_exceeds_q8: bool  # primes^(2 ell) > q^(1/8)


@dataclass(frozen=True)
class HolderReport:
    plan: AmplificationPlan
    S_abs: float
    exponent: int  # 2^r ell_1 ... ell_r
    density_sum: complex
    log_lhs: float
    log_rhs: float
    holds: bool
    densities: tuple[DensityCheck, ...]


def holder_amplification_check(
    plan: AmplificationPlan, q: int, a: int, intervals, budget: int = DEFAULT_BUDGET
) -> HolderReport:
    """Evaluate both sides of the Holder step and the density-norm bounds.

    Every M-tilde uses the exact number of primes in I_i coprime to q, so
    |S|^(2^r prod ell) <= (prod M~)^(2^r prod ell) / prod M~_i^(2 ell_i) * |sum mu e_q|
    holds as a literal inequality (with equality when r = 1).
    """
    if gcd(a, q) != 1:
        raise NotCoprime(f"gcd(a={a}, q={q}) != 1")
    if len(intervals) != plan.r:
        raise RangeError("plan and interval count disagree")
    S = multilinear_sq_sum(list(intervals), q, a, restrict_to_primes=True, budget=budget)
    dens = [mu_density(iv, l, q, budget=budget) for iv, l in zip(intervals, plan.ell_i)]
    counts = [len(d.primes) for d in dens]
    exponent = 2**plan.r * math.prod(plan.ell_i)
    dsum = _density_sum(dens, q, a, budget)
    log_lhs = exponent * math.log(abs(S)) if abs(S) > 0 else -math.inf
    log_pref = exponent * sum(map(math.log, counts)) - sum(
        2 * l * math.log(c) for l, c in zip(plan.ell_i, counts)
    )
    mag = abs(dsum)
    log_rhs = log_pref + math.log(mag) if mag > 0 else -math.inf
    # r = 1 is an identity; allow rounding noise relative to the scale of the terms
    tol = 1e-9 * max(1.0, abs(log_rhs)) if math.isfinite(log_rhs) else 0.0
    holds = log_lhs <= log_rhs + tol or (log_lhs == -math.inf)
    checks = []
    for d, l, b, c in zip(dens, plan.ell_i, plan.beta_i, counts):
        M = d.interval[1]
        l2_bound = float((4 * l) ** (2 * l) * c ** (2 * l))
        thr = q ** (-1 / 8) * d.l1
        checks.append(
            DensityCheck(
                interval=d.interval,
                ell=l,
                primes=c,
                M_tilde_proxy=M / math.log(M),
                l1=d.l1,
                l2_squared=d.l2_squared,
                linf=d.linf,
                l2_bound=l2_bound,
                l2_ok=d.l2_squared < l2_bound,
                congruence_lifts=2 * l * M ** (8 * l - 2) < q,
                linf_threshold=thr,
                linf_ok=d.linf < thr,
                linf_applicable=ell_conditions(b, l)[0],
                mass_exceeds_q8=c ** (2 * l) > q ** (1 / 8),
            )
        )
    return HolderReport(plan, abs(S), exponent, dsum, log_lhs, log_rhs, holds, tuple(checks))


# -- cancellation measurement -------------------------------------------------


@dataclass(frozen=True)
class CancellationReport:
    q: int
    rho: float
    beta: float
    r: int
    N: int
    seed: int
    exceptional_density: float
    in_proposition_range: bool
    terms: int
    samples: tuple[tuple[int, float], ...]  # (a, |sum| / N)

    @property
    def max_ratio(self) -> float:
        return max((s[1] for s in self.samples), default=0.0)

    @property
    def median_ratio(self) -> float:
        return statistics.median(s[1] for s in self.samples) if self.samples else 0.0


def sample_units(q: int, count: int, seed: int) -> list[int]:
    """``count`` residues a in [1, q) coprime to q from a seeded generator."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        a = rng.randrange(1, q)
        if gcd(a, q) == 1:
            out.append(a)
    return out


def proposition_cancellation(
    q: int,
    rho: float,
    beta: float,
    r: int,
    a_samples: int,
    seed: int = DEFAULT_SEED,
    sieve_limit: int = 10**7,
) -> CancellationReport:
    """|sum_{x <= N, x not in E, (x, q) = 1} e_q(a x^-2)| / N for sampled a, N = ceil(q^rho)."""
    if q < 2 or not 0 < rho < 1:
        raise RangeError(f"need q >= 2 and 0 < rho < 1; got ({q}, {rho})")
    if a_samples < 0:
        raise RangeError("a_samples must be >= 0")
    N = math.ceil(q**rho)
    if N < 100:
        raise RangeError(f"N = {N} < 100")
    if N > sieve_limit:
        raise BudgetExceeded(f"N = {N} exceeds sieve limit {sieve_limit}")
    params = ExceptionalParams(N, beta, r)
    E = exceptional_set(params)
    keep = E.complement().tolist()
    inv2 = inverse_squares(keep, q)
    use_np = q < 2**31
    base = np.array(inv2, dtype=np.int64) if use_np else None
    rows = []
    for a in sample_units(q, a_samples, seed):
        ks = (base * a) % q if use_np else [a * k % q for k in inv2]
        rows.append((a, abs(char_sum(ks, q)) / N))
    return CancellationReport(
        q, rho, beta, r, N, seed, E.density, params.in_proposition_range, len(inv2), tuple(rows)
    )
