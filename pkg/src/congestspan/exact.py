"""Exact comparisons of integer counts against fractional powers of n.

Thresholds like n^(1/k) are irrational in general, so float powers are not
trustworthy at the boundaries (256**(1/8) evaluates slightly above 2.0).
Every comparison here is done in big-integer arithmetic: for expo = p/q,
count >= n^(p/q) iff count^q >= n^p. Sums of several such powers, which have
no integer reformulation, go through Decimal with generous precision.
"""

from __future__ import annotations

from decimal import Decimal, getcontext
from fractions import Fraction
from typing import Union

Rational = Union[int, float, str, Fraction]


def as_fraction(x: Rational) -> Fraction:
    """Exact rational from int, Fraction, decimal string, or 'p/q' string.

    Floats are converted through their shortest repr so that 0.34 means
    34/100, not the binary expansion of the double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        if "/" in x:
            num, den = x.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def count_ge_pow(count: int, n: int, expo: Fraction) -> bool:
    """count >= n**expo, exactly."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    p, q = expo.numerator, expo.denominator
    if p >= 0:
        return count ** q >= n ** p
    return count ** q * n ** (-p) >= 1


def count_gt_pow(count: int, n: int, expo: Fraction) -> bool:
    p, q = expo.numerator, expo.denominator
    if p >= 0:
        return count ** q > n ** p
    return count ** q * n ** (-p) > 1


def count_le_pow(count: int, n: int, expo: Fraction) -> bool:
    return not count_gt_pow(count, n, expo)


def count_lt_pow(count: int, n: int, expo: Fraction) -> bool:
    return not count_ge_pow(count, n, expo)


def pow_ceil(n: int, expo: Fraction) -> int:
    """Smallest integer >= n**expo (n >= 1, expo >= 0)."""
    if n < 1 or expo < 0:
        raise ValueError("need n >= 1 and expo >= 0")
    k = int(float(n) ** float(expo))
    while not count_ge_pow(k, n, expo):
        k += 1
    while k > 0 and count_ge_pow(k - 1, n, expo):
        k -= 1
    return k


def pow_floor(n: int, expo: Fraction) -> int:
    """Largest integer <= n**expo."""
    k = pow_ceil(n, expo)
    return k if count_le_pow(k, n, expo) else k - 1


def nth_root_ceil(x: int, q: int) -> int:
    """Smallest integer t with t**q >= x."""
    if x < 1 or q < 1:
        raise ValueError("need x >= 1 and q >= 1")
    t = max(1, int(x ** (1.0 / q)))
    while t ** q < x:
        t += 1
    while t > 1 and (t - 1) ** q >= x:
        t -= 1
    return t


def floor_log2(x: Fraction) -> int:
    """Largest k with 2**k <= x, for positive rational x."""
    if x <= 0:
        raise ValueError("need x > 0")
    k = 0
    if x >= 1:
        while Fraction(2) ** (k + 1) <= x:
            k += 1
    else:
        while Fraction(2) ** k > x:
            k -= 1
    return k


def ceil_fraction(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def ceil_log2_int(n: int) -> int:
    """ceil(log2(n)) for n >= 1."""
    if n < 1:
        raise ValueError("need n >= 1")
    return (n - 1).bit_length()


def npow_decimal(n: int, expo: Fraction, prec: int = 60) -> Decimal:
    """n**expo as a Decimal with prec significant digits.

    Used only where several fractional powers must be summed; single-term
    comparisons should use the exact count_*_pow functions instead.
    """
    getcontext().prec = prec
    if n == 0:
        return Decimal(0)
    base = Decimal(n)
    return (Decimal(expo.numerator) / Decimal(expo.denominator) * base.ln()).exp()
