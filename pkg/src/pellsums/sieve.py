"""Smallest-prime-factor sieve, factor profiles and prime helpers.

The on-disk cache format is a 12-byte header (``b"SPF1"`` followed by N as a
little-endian unsigned 64-bit integer) and then N + 1 little-endian uint32
entries spf[0..N], with spf[0] = 0 and spf[1] = 1.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from math import isqrt
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, RangeError

SIEVE_LIMIT = 10**8
CACHE_MAGIC = b"SPF1"
_HEADER = struct.Struct("<4sQ")


@dataclass(frozen=True)
class FactorProfile:
    n: int
    primes_desc: tuple[int, ...]

    @property
    def omega(self) -> int:
        """Number of prime factors counted with multiplicity."""
        return len(self.primes_desc)


def spf_sieve(N: int) -> np.ndarray:
    """uint32 array whose n-th entry is the smallest prime factor of n (spf[1] = 1)."""
    if N > SIEVE_LIMIT:
        raise BudgetExceeded(f"sieve size {N} exceeds {SIEVE_LIMIT}")
    N = max(N, 1)
    spf = np.zeros(N + 1, dtype=np.uint32)
    for p in range(2, isqrt(N) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    return spf


class FactorTable:
    """Frozen factorization table for 1..N built on a smallest-prime-factor sieve."""

    def __init__(self, N: int, spf: np.ndarray | None = None):
        if N < 1:
            raise RangeError(f"N must be >= 1, got {N}")
        self.N = N
        self.spf = spf_sieve(N) if spf is None else spf
        if len(self.spf) != N + 1:
            raise ValueError("spf table length does not match N")
        self.spf.setflags(write=False)

    def __len__(self) -> int:
        return self.N

    def factors(self, n: int) -> list[int]:
        """Prime factors of n with multiplicity, ascending."""
        if not 1 <= n <= self.N:
            raise RangeError(f"{n} outside 1..{self.N}")
        out = []
        spf = self.spf
        while n > 1:
            p = int(spf[n])
            out.append(p)
            n //= p
        return out

    def profile(self, n: int) -> FactorProfile:
        return FactorProfile(n, tuple(reversed(self.factors(n))))

    __getitem__ = profile

    def __iter__(self):
        for n in range(1, self.N + 1):
            yield self.profile(n)

    def top_factors(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized profiles: (omega, tops) where ``tops[j, n]`` is p_{j+1}(n).

        Entries past omega(n) are 0.  Factors come out of the sieve in
        ascending order, so a sliding window of the last k keeps the k largest.
        """
        N = self.N
        spf = self.spf.astype(np.int64)
        rem = np.arange(N + 1, dtype=np.int64)
        omega = np.zeros(N + 1, dtype=np.int32)
        window = np.zeros((k, N + 1), dtype=np.int64)  # window[-1] is the newest
        active = np.nonzero(rem > 1)[0]
        while active.size:
            f = spf[rem[active]]
            if k > 1:
                window[:-1, active] = window[1:, active]
            window[-1, active] = f
            omega[active] += 1
            rem[active] //= f
            active = active[rem[active] > 1]
        # newest (largest) first
        return omega, window[::-1].copy()

    def largest_prime_factor(self) -> np.ndarray:
        """Largest prime factor of every n (entry 1 for n = 1, 0 for n = 0)."""
        _, tops = self.top_factors(1)
        lpf = tops[0]
        lpf[1] = 1
        return lpf


def save_spf_cache(path, table: FactorTable) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, table.N))
        fh.write(table.spf.astype("<u4").tobytes())


def load_spf_cache(path, N: int | None = None) -> FactorTable:
    path = Path(path)
    with path.open("rb") as fh:
        magic, stored = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CACHE_MAGIC:
            raise ValueError(f"{path} is not an SPF1 cache")
        if N is not None and stored != N:
            raise ValueError(f"cache holds N={stored}, wanted N={N}")
        spf = np.frombuffer(fh.read(), dtype="<u4").astype(np.uint32)
    return FactorTable(stored, spf)


def sieve_profiles(N: int, cache_dir=None) -> FactorTable:
    """Factor table for 1..N, optionally through an on-disk cache keyed by N."""
    if N > SIEVE_LIMIT:
        raise BudgetExceeded(f"sieve size {N} exceeds {SIEVE_LIMIT}")
    if cache_dir is None:
        return FactorTable(N)
    path = Path(cache_dir) / f"spf_{N}.bin"
    if path.exists():
        return load_spf_cache(path, N)
    table = FactorTable(N)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_spf_cache(path, table)
    return table


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def primes_between(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    if hi < max(lo, 2):
        return []
    ps = primes_upto(hi)
    return [int(p) for p in ps[ps >= lo]]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorint(n: int) -> dict[int, int]:
    """Trial-division factorization {p: e}; meant for moduli of modest size."""
    if n < 1:
        raise RangeError(f"cannot factor {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out
