"""Certified dyadic enclosures of natural logarithms and a few integer helpers.

All results are exact rationals.  ``ln_enclosure(x)`` returns ``(lo, hi)``
with ``lo <= ln x <= hi``, both dyadic and ``hi - lo <= 2^-bits``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

DEFAULT_BITS = 40


def _atanh_series(z: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Enclose ``atanh(z) = sum z^(2j+1)/(2j+1)`` for ``0 <= z <= 1/3``."""
    if z == 0:
        return Fraction(0), Fraction(0)
    eps = Fraction(1, 1 << (bits + 4))
    z2 = z * z
    term = z
    total = Fraction(0)
    j = 0
    while True:
        total += term / (2 * j + 1)
        term *= z2
        j += 1
        # remaining tail <= term / ((2j+1)(1 - z^2))
        tail = term / ((2 * j + 1) * (1 - z2))
        if tail <= eps:
            return total, total + tail


def _round_down(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.floor(x * scale), scale)


def _round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.ceil(x * scale), scale)


@lru_cache(maxsize=None)
def _ln2(bits: int) -> tuple[Fraction, Fraction]:
    lo, hi = _atanh_series(Fraction(1, 3), bits + 8)
    return 2 * lo, 2 * hi


@lru_cache(maxsize=4096)
def ln_enclosure(x: Fraction | int, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
    """Dyadic ``(lo, hi)`` with ``lo <= ln x <= hi`` and ``hi - lo <= 2^-bits``.

    >>> lo, hi = ln_enclosure(Fraction(2))
    >>> float(lo) < 0.6931471805599453 < float(hi)
    True
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError("logarithm of a nonpositive number")
    if x == 1:
        return Fraction(0), Fraction(0)
    # x = 2^e * y with y in [1, 2); then ln y = 2 atanh((y-1)/(y+1)), z < 1/3
    e = x.numerator.bit_length() - x.denominator.bit_length()
    y = x / Fraction(2) ** e
    while y >= 2:
        y /= 2
        e += 1
    while y < 1:
        y *= 2
        e -= 1
    work = bits + 8 + max(1, abs(e)).bit_length()
    s_lo, s_hi = _atanh_series((y - 1) / (y + 1), work)
    l2_lo, l2_hi = _ln2(work)
    if e >= 0:
        lo, hi = e * l2_lo + 2 * s_lo, e * l2_hi + 2 * s_hi
    else:
        lo, hi = e * l2_hi + 2 * s_lo, e * l2_lo + 2 * s_hi
    return _round_down(lo, bits + 2), _round_up(hi, bits + 2)


def ln_upper(x, bits: int = DEFAULT_BITS) -> Fraction:
    return ln_enclosure(Fraction(x), bits)[1]


def ln_lower(x, bits: int = DEFAULT_BITS) -> Fraction:
    return ln_enclosure(Fraction(x), bits)[0]


def ceil_log_upper(x) -> int:
    """Ceiling of a certified upper bound for ``ln x`` (so at least ``ceil(ln x)``)."""
    x = Fraction(x)
    if x <= 1:
        return 0
    return math.ceil(ln_upper(x))


def log_ratio_upper(a, b, bits: int = DEFAULT_BITS) -> Fraction:
    """Rational upper bound for ``ln a / ln b`` with ``a >= 1`` and ``b > 1``."""
    a, b = Fraction(a), Fraction(b)
    if b <= 1:
        raise ValueError("denominator logarithm must be positive")
    if a <= 1:
        return Fraction(0) if a == 1 else -(ln_lower(1 / a, bits) / ln_upper(b, bits))
    return ln_upper(a, bits) / ln_lower(b, bits)


def floor_log2(k: int) -> int:
    """``floor(log2 k)`` for a positive integer."""
    if k < 1:
        raise ValueError("k must be positive")
    return k.bit_length() - 1


def iroot_floor(n: int, b: int) -> int:
    """Largest integer ``r`` with ``r^b <= n``."""
    if n < 0 or b < 1:
        raise ValueError("need n >= 0 and b >= 1")
    if n < 2 or b == 1:
        return n
    r = 1 << ((n.bit_length() + b - 1) // b)
    while True:
        s = ((b - 1) * r + n // r ** (b - 1)) // b
        if s >= r:
            break
        r = s
    while r ** b > n:
        r -= 1
    while (r + 1) ** b <= n:
        r += 1
    return r


def rational_power_lower(K, alpha, bits: int = 32) -> Fraction:
    """Rational lower bound for ``K^alpha`` with ``K >= 1`` and ``alpha > 0``."""
    K, alpha = Fraction(K), Fraction(alpha)
    a, b = alpha.numerator, alpha.denominator
    p = K ** a
    scale = 1 << bits
    r = iroot_floor(p.numerator * scale ** b // p.denominator, b)
    return max(Fraction(r, scale), Fraction(1) if p >= 1 else Fraction(0))
