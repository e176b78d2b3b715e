"""Exact helpers for comparing integers against real powers ``x**e``."""
from __future__ import annotations

import math
from fractions import Fraction

MAX_DENOMINATOR = 10**4


def rational_exponent(e) -> Fraction:
    """Read a float exponent as the short rational it was meant to be.

    ``0.55`` becomes ``11/20``. If no rational with denominator up to
    ``MAX_DENOMINATOR`` rounds to the same float, the exact binary value is kept.
    """
    if isinstance(e, Fraction):
        return e
    f = Fraction(e).limit_denominator(MAX_DENOMINATOR)
    return f if float(f) == float(e) else Fraction(e)


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, k >= 1."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # float seed, then correct
    try:
        r = int(round(math.exp(math.log(n) / k)))
    except OverflowError:
        r = 1 << (n.bit_length() // k + 1)
    r = max(r, 1)
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def floor_power(x: int, e) -> int:
    """floor(x ** e) for integer x >= 1 and real e >= 0, exact when e is a short rational."""
    if x < 1:
        raise ValueError("x must be positive")
    fe = rational_exponent(e)
    if fe < 0:
        raise ValueError("exponent must be nonnegative")
    if fe.denominator <= MAX_DENOMINATOR and fe.numerator * x.bit_length() < 10**6:
        return iroot(x**fe.numerator, fe.denominator)
    return math.floor(x ** float(e))


def ceil_power(x: int, e) -> int:
    """ceil(x ** e) under the same conventions as :func:`floor_power`."""
    f = floor_power(x, e)
    fe = rational_exponent(e)
    if fe.denominator <= MAX_DENOMINATOR and fe.numerator * x.bit_length() < 10**6:
        return f if f**fe.denominator == x**fe.numerator else f + 1
    return math.ceil(x ** float(e))
