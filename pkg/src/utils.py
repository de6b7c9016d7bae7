"""
Utility functions
Console symbols with ASCII fallbacks and exact-arithmetic helpers
"""

import math
import sys
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, float, Fraction]


class Symbols:
    """
    Unicode symbols with ASCII fallbacks for Windows compatibility
    """

    _supports_unicode = (
        (getattr(sys.stderr, 'encoding', None) or '').lower().startswith('utf')
    )

    if _supports_unicode:
        CHECK = '✓'
        CROSS = '✗'
        WARNING = '⚠'
        INFO = 'ℹ'
        ARROW_RIGHT = '→'
    else:
        CHECK = '[OK]'
        CROSS = '[X]'
        WARNING = '[!]'
        INFO = '[i]'
        ARROW_RIGHT = '->'


def check(text: str) -> str:
    """Add check mark to text"""
    return f"{Symbols.CHECK} {text}"


def cross(text: str) -> str:
    """Add cross mark to text"""
    return f"{Symbols.CROSS} {text}"


def warning(text: str) -> str:
    """Add warning symbol to text"""
    return f"{Symbols.WARNING} {text}"


def info(text: str) -> str:
    """Add info symbol to text"""
    return f"{Symbols.INFO} {text}"


def as_fraction(value: Number) -> Fraction:
    """
    Convert a knob value to an exact rational

    Floats are snapped to the nearest fraction with a bounded denominator,
    so 0.3 becomes 3/10 rather than its binary expansion.
    """
    if isinstance(value, Rational):
        return Fraction(value)
    return Fraction(value).limit_denominator(10**9)


def floor_frac(value: Number) -> int:
    return math.floor(as_fraction(value))


def ceil_frac(value: Number) -> int:
    return math.ceil(as_fraction(value))


def sqrt_frac(value: Number) -> Fraction:
    """Square root of a non-negative knob, exact when the input is a perfect square"""
    q = as_fraction(value)
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return as_fraction(math.sqrt(q))
