from fractions import Fraction

import mpmath as mp
import pytest

from legtau.precision import (as_mpf, div, get_precision, guard_digits,
                              nstr_sci, scalar_from_str, scalar_to_str,
                              set_precision, sub, to_number, working_precision)


def test_set_precision_enforces_minimum():
    with pytest.raises(ValueError):
        set_precision(20)
    set_precision(35)
    assert get_precision() == 35


def test_working_precision_restores():
    set_precision(40)
    with working_precision(60):
        assert get_precision() == 60
    assert get_precision() == 40


def test_to_number_stays_exact():
    assert to_number("3") == 3 and isinstance(to_number("3"), int)
    assert to_number("-1/2") == Fraction(-1, 2)
    assert to_number("0.25") == Fraction(1, 4)
    with pytest.raises(ValueError):
        to_number("zebra")


def test_sub_and_div_mix_exact_with_mpf():
    set_precision(40)
    ulp = mp.mpf(10) ** (-get_precision() + 2)
    a, b = Fraction(1, 3), mp.mpf(2)
    assert abs(sub(a, b) - (as_mpf(Fraction(-5, 3)))) <= ulp
    assert abs(sub(b, a) - as_mpf(Fraction(5, 3))) <= ulp
    assert abs(div(a, b) - as_mpf(Fraction(1, 6))) <= ulp
    # never a Python float on the exact path
    assert div(1, 2) == Fraction(1, 2) and not isinstance(div(1, 2), float)


def test_scalar_str_roundtrip():
    set_precision(40)
    for value in (Fraction(-7, 3), 42, mp.mpf("0.1") ** 3, mp.sqrt(2)):
        text = scalar_to_str(value)
        back = scalar_from_str(text)
        assert as_mpf(back) == as_mpf(value)


def test_nstr_sci_format():
    set_precision(40)
    s = nstr_sci(mp.mpf("0.7220830368"), 10)
    assert s.startswith("7.220830368") and "e-1" in s
    assert nstr_sci(0, 8).endswith("e+0")


def test_guard_digits_grow_with_width():
    assert guard_digits(10) < guard_digits(30) < guard_digits(90)
