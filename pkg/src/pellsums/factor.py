"""Smooth-number counts, the exceptional set E and the box partition of {1..N} minus E.

For n <= N write n = p_1 p_2 ... with p_1 >= p_2 >= ... (multiplicity kept)
and x' = n / (p_1 ... p_r).  The integer n is exceptional when it has fewer
than r prime factors, when p_r <= N^beta, or (with ``spacing``) when some
p_i <= (1 + 10/log N) p_{i+1} for 1 <= i < r.  In ``strict`` mode the same
spacing is also demanded between p_r and the largest prime of x'.

Non-exceptional integers are sorted into boxes: p_i is placed in the grid
cell (c M, M] with M = N c^k, c = 1 - 1/log N.  A box is the tuple of cells
(k_1, ..., k_r).  Its members split exactly into product pieces
{p_1 in an interval of primes} x {p_2} x ... x {p_r} x {x'}, which is what
makes the sum over boxes reproduce the direct sum term for term.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import NotCoprime, RangeError
from .expsum import SumValue, _value, inverse_squares, multilinear_sq_sum
from .sieve import FactorTable, primes_upto, sieve_profiles


def psi_smooth_count(N: int, y: float, table: FactorTable | None = None) -> int:
    """Number of 1 <= n <= N whose prime factors are all <= y (n = 1 included)."""
    if N < 1:
        raise RangeError(f"N must be >= 1, got {N}")
    if y >= N:
        return N
    if y < 2:
        return 1
    if table is None or table.N < N:
        lpf = _lpf_sieve(N)
    else:
        lpf = table.largest_prime_factor()[: N + 1]
    return int(np.count_nonzero(lpf[1:] <= y))


def _lpf_sieve(N: int) -> np.ndarray:
    lpf = np.ones(N + 1, dtype=np.int64)
    lpf[0] = 0
    for p in primes_upto(N):
        lpf[p::p] = p
    return lpf


@dataclass(frozen=True)
class ExceptionalParams:
    N: int
    beta: float
    r: int
    spacing: bool = True
    strict: bool = False

    def __post_init__(self):
        if self.N < 2:
            raise RangeError(f"N must be >= 2, got {self.N}")
        if self.r < 1:
            raise RangeError(f"r must be >= 1, got {self.r}")
        if not 0 < self.beta < 1:
            raise RangeError(f"beta must lie in (0, 1), got {self.beta}")

    @property
    def log_N(self) -> float:
        return math.log(self.N)

    @property
    def spacing_factor(self) -> float:
        return 1 + 10 / self.log_N

    @property
    def threshold(self) -> float:
        """N^beta; p_r must exceed it."""
        return self.N**self.beta

    @property
    def in_proposition_range(self) -> bool:
        return 1 / self.log_N < self.beta < 0.1


@dataclass
class Factorization:
    """The r largest prime factors of every n <= N, plus the largest prime of x'."""

    params: ExceptionalParams
    omega: np.ndarray
    tops: np.ndarray  # tops[i, n] = p_{i+1}(n); row r is the largest prime of x'
    cofactor: np.ndarray


def factorize_range(params: ExceptionalParams, table: FactorTable | None = None) -> Factorization:
    if table is None or table.N != params.N:
        table = sieve_profiles(params.N)
    r = params.r
    omega, tops = table.top_factors(r + 1)
    n = np.arange(params.N + 1, dtype=np.int64)
    prod = np.ones(params.N + 1, dtype=np.int64)
    for i in range(r):
        prod *= np.where(tops[i] > 0, tops[i], 1)
    cofactor = np.where(n > 0, n // prod, 0)
    return Factorization(params, omega, tops, cofactor)


@dataclass(frozen=True)
class ExceptionalSet:
    """E as a boolean mask over 0..N (index 0 unused).  Carries no modulus."""

    params: ExceptionalParams
    mask: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.mask[1:]))

    @property
    def density(self) -> float:
        return self.size / self.params.N

    @property
    def lemma_budget(self) -> float:
        """beta (log 1/beta)^r."""
        b = self.params.beta
        return b * math.log(1 / b) ** self.params.r

    @property
    def spacing_budget(self) -> float:
        """log log N / log N."""
        L = self.params.log_N
        return math.log(L) / L if L > 1 else 0.0

    def __contains__(self, n: int) -> bool:
        return 1 <= n <= self.params.N and bool(self.mask[n])

    def members(self) -> np.ndarray:
        return np.nonzero(self.mask)[0]

    def complement(self) -> np.ndarray:
        keep = ~self.mask
        keep[0] = False
        return np.nonzero(keep)[0]

    def summary(self) -> dict:
        p = self.params
        return {
            "N": p.N,
            "beta": p.beta,
            "r": p.r,
            "spacing": p.spacing,
            "strict": p.strict,
            "size": self.size,
            "density": self.density,
            "lemma_budget": self.lemma_budget,
            "spacing_budget": self.spacing_budget,
        }


def _exceptional_mask(fz: Factorization) -> np.ndarray:
    p = fz.params
    r, tops = p.r, fz.tops
    mask = fz.omega < r
    mask |= tops[r - 1] <= p.threshold
    s = p.spacing_factor
    if p.spacing:
        for i in range(r - 1):
            mask |= tops[i] <= s * tops[i + 1]
    if p.strict:
        # tops[r] is 0 when x' = 1
        mask |= (tops[r] > 0) & (tops[r - 1] <= s * tops[r])
    mask[0] = False
    return mask


def exceptional_set(params: ExceptionalParams, table: FactorTable | None = None) -> ExceptionalSet:
    fz = factorize_range(params, table)
    return ExceptionalSet(params, _exceptional_mask(fz))


@dataclass
class Box:
    cells: tuple[int, ...]
    M: tuple[float, ...]
    cofactor_bound: float
    members: list[int] = field(default_factory=list)
    # (x', p_2, ..., p_r) -> p_1 values present
    groups: dict = field(default_factory=lambda: defaultdict(list), repr=False)

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass
class BoxDecomposition:
    params: ExceptionalParams
    exceptional: ExceptionalSet
    boxes: list[Box]
    shrink: float  # 1 - 1/log N

    @property
    def box_count(self) -> int:
        return len(self.boxes)

    @property
    def covered(self) -> int:
        return sum(b.count for b in self.boxes)

    def box_constant(self) -> float:
        """box_count / (log N)^r."""
        return self.box_count / self.params.log_N**self.params.r

    def invariant_violations(self) -> list[str]:
        p = self.params
        sep = 1 + 2 / p.log_N
        bad = []
        for b in self.boxes:
            for i in range(p.r - 1):
                if not b.M[i] > sep * b.M[i + 1]:
                    bad.append(f"box {b.cells}: M_{i + 1} <= (1 + 2/log N) M_{i + 2}")
            if not all(m > p.threshold for m in b.M):
                bad.append(f"box {b.cells}: some M_i <= N^beta")
        return bad

    def pieces(self, box: Box):
        """Exact product pieces ((p1_lo, p1_hi), (p_2, ..., p_r), x') of a box."""
        p = self.params
        N, r, s = p.N, p.r, p.spacing_factor
        M1 = box.M[0]
        for key in sorted(box.groups):
            xprime, rest = key[0], key[1:]
            top_x = _largest_prime(xprime)
            lo_excl = self.shrink * M1
            lo_incl = 2
            if r >= 2:
                lo_excl = max(lo_excl, s * rest[0])
            else:
                lo_excl = max(lo_excl, p.threshold)
                lo_incl = max(lo_incl, top_x)
                if p.strict and xprime > 1:
                    lo_excl = max(lo_excl, s * top_x)
            hi = min(math.floor(M1), N // (xprime * math.prod(rest)))
            lo = max(math.floor(lo_excl) + 1, lo_incl)
            yield (lo, hi), rest, xprime


def _largest_prime(n: int) -> int:
    best, d = 1, 2
    while d * d <= n:
        while n % d == 0:
            best, n = d, n // d
        d += 1
    return max(best, n) if n > 1 else best


def _cell(p: int, N: int, step: float) -> int:
    """k with N c^(k+1) < p <= N c^k, c = exp(-step)."""
    k = int(math.floor(math.log(N / p) / step))
    while k > 0 and p > N * math.exp(-k * step):
        k -= 1
    while p <= N * math.exp(-(k + 1) * step):
        k += 1
    return k


def box_partition(params: ExceptionalParams, table: FactorTable | None = None) -> BoxDecomposition:
    """Assign every n in {1..N} minus E to the box of its r largest prime factors."""
    if not params.spacing:
        raise RangeError("box_partition needs the spacing condition (spacing=True)")
    fz = factorize_range(params, table)
    E = ExceptionalSet(params, _exceptional_mask(fz))
    N, r = params.N, params.r
    c = 1 - 1 / params.log_N
    step = -math.log(c)
    boxes: dict[tuple, Box] = {}
    cell_cache: dict[int, int] = {}
    tops = fz.tops
    for n in E.complement().tolist():
        ps = [int(tops[i, n]) for i in range(r)]
        cells = []
        for p in ps:
            k = cell_cache.get(p)
            if k is None:
                k = cell_cache[p] = _cell(p, N, step)
            cells.append(k)
        key = tuple(cells)
        box = boxes.get(key)
        if box is None:
            M = tuple(N * math.exp(-k * step) for k in key)
            box = boxes[key] = Box(key, M, 2 * N / math.prod(M))
        box.members.append(n)
        box.groups[(int(fz.cofactor[n]), *ps[1:])].append(ps[0])
    ordered = [boxes[k] for k in sorted(boxes)]
    return BoxDecomposition(params, E, ordered, c)


@dataclass(frozen=True)
class PartitionIdentity:
    direct: SumValue
    boxed: complex
    pieces: int
    boxes: int

    @property
    def residual(self) -> float:
        return abs(self.direct.value - self.boxed)


def partition_sums(
    params: ExceptionalParams, q: int, a: int, table: FactorTable | None = None
) -> PartitionIdentity:
    """Both sides of the box decomposition of sum_{x <= N, x not in E, (x,q)=1} e_q(a x^-2)."""
    if gcd(a, q) != 1:
        raise NotCoprime(f"gcd(a={a}, q={q}) != 1")
    dec = box_partition(params, table)
    keep = dec.exceptional.complement().tolist()
    ks = [a * k % q for k in inverse_squares(keep, q)]
    direct = _value(ks, q)
    parts = []
    npieces = 0
    for box in dec.boxes:
        for p1_range, rest, xprime in dec.pieces(box):
            if gcd(xprime, q) != 1:
                continue
            ivs = [p1_range] + [(p, p) for p in rest]
            sv = multilinear_sq_sum(ivs, q, a, restrict_to_primes=True, fixed_cofactor=xprime)
            parts.append(sv.value)
            npieces += 1
    boxed = complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))
    return PartitionIdentity(direct, boxed, npieces, dec.box_count)


def partition_sum_identity(params: ExceptionalParams, q: int, a: int, table=None) -> float:
    """|direct sum - sum over boxes of multilinear sums|."""
    return partition_sums(params, q, a, table).residual
