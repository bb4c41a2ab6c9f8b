"""Run-wide decimal precision and the two-path scalar model.

All real numbers in this package are either exact rationals
(``int`` / ``fractions.Fraction``) or mpmath floats evaluated at the
run-wide precision.  Exact values stay exact through every rational-closed
operation; anything touching a Gamma value, a fractional power or a
quadrature rule becomes an ``mpf``.  Python's operator dispatch does the
mixing (``Fraction * mpf -> mpf``), so most code never needs to care.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction

import mpmath as mp

MIN_PRECISION = 30
DEFAULT_PRECISION = 50

Scalar = object  # int | Fraction | mp.mpf; alias for documentation purposes


def set_precision(digits: int) -> None:
    """Set the run-wide working precision in decimal digits (>= 30)."""
    digits = int(digits)
    if digits < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} digits, got {digits}")
    mp.mp.dps = digits


def get_precision() -> int:
    return mp.mp.dps


@contextlib.contextmanager
def working_precision(digits: int):
    """Temporarily switch the working precision."""
    old = mp.mp.dps
    set_precision(digits)
    try:
        yield
    finally:
        mp.mp.dps = old


@contextlib.contextmanager
def extra_digits(n: int = 10):
    """Temporarily add guard digits on top of the current precision."""
    old = mp.mp.dps
    mp.mp.dps = old + int(n)
    try:
        yield
    finally:
        mp.mp.dps = old


def guard_digits(width: int) -> int:
    """Internal guard digits for monomial-basis work at a given dimension.

    Shifted-Legendre monomial coefficients grow like 10^(0.72 w), and the
    operational pipeline cancels them back down to O(1), so intermediate
    arithmetic needs that many digits of headroom over the run precision.
    """
    return int(0.75 * width) + 30


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction))


def sub(a, b):
    """a - b across the exact/mpf boundary.

    Fraction.__sub__ rejects mpf and mpf.__rsub__ rejects Fraction (addition
    and multiplication are fine), so mixed subtraction needs one coercion.
    """
    try:
        return a - b
    except TypeError:
        return as_mpf(a) - as_mpf(b)


def div(a, b):
    """a / b staying exact on rationals; never produces a Python float."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    try:
        return a / b
    except TypeError:
        return as_mpf(a) / as_mpf(b)


def as_mpf(value) -> mp.mpf:
    """Coerce a scalar to mpf at the current precision."""
    if isinstance(value, Fraction):
        return mp.mpf(value.numerator) / value.denominator
    return mp.mpf(value)


def to_number(text):
    """Parse a scalar literal: '3', '-1/2' and '0.25' stay exact rationals."""
    if isinstance(text, (int, Fraction)):
        return text
    if isinstance(text, mp.mpf):
        return text
    s = str(text).strip()
    try:
        frac = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc
    if frac.denominator == 1:
        return int(frac)
    return frac


def nstr_sci(value, digits: int | None = None) -> str:
    """Scientific-notation string with `digits` significant digits."""
    if digits is None:
        digits = get_precision()
    x = as_mpf(value)
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+0"
    return mp.nstr(x, digits, min_fixed=1, max_fixed=0, strip_zeros=False)


def scalar_to_str(value) -> str:
    """Serialize a scalar losslessly: rationals as 'p/q', floats in decimal."""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    # a few digits beyond dps guarantees the mpf round-trips exactly
    return mp.nstr(as_mpf(value), get_precision() + 5, strip_zeros=True)


def scalar_from_str(text):
    s = text.strip()
    if "/" in s or ("." not in s and "e" not in s and "E" not in s):
        return to_number(s)
    return mp.mpf(s)


# The package cannot do anything useful below the minimum precision, so make
# importing it establish a sane default instead of mpmath's 15 digits.
if mp.mp.dps < MIN_PRECISION:
    set_precision(DEFAULT_PRECISION)
