from fractions import Fraction

import mpmath as mp
import pytest

from legtau.errors import ParseError, ValidationError
from legtau.expressions import (as_callable, derivative, evaluate,
                                free_variables, kernel_spec_from_ast,
                                parse_expression, power_terms,
                                taylor_series_2d)
from legtau.precision import as_mpf

from conftest import assert_close


def test_parse_and_evaluate_rational():
    ast = parse_expression("1 - x/4")
    assert evaluate(ast, x=Fraction(1, 2)) == Fraction(7, 8)
    assert free_variables(ast) == {"x"}


def test_parse_powers_both_spellings():
    for text in ("x^2 - x", "x**2 - x"):
        ast = parse_expression(text)
        assert evaluate(ast, x=Fraction(3)) == 6


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_expression("x + ", line=7)
    assert err.value.line == 7
    with pytest.raises(ParseError):
        parse_expression("x + $")
    with pytest.raises(ParseError):
        parse_expression("foo(x)")


def test_evaluate_functions():
    ast = parse_expression("exp(x)*erf(sqrt(x))")
    x = mp.mpf("0.49")
    assert_close(evaluate(ast, x=x), mp.exp(x) * mp.erf(mp.sqrt(x)), mp.mpf(10) ** -35)


def test_gamma_constant():
    ast = parse_expression("6/gamma(1/3)")
    assert_close(evaluate(ast), 6 / mp.gamma(mp.mpf(1) / 3), mp.mpf(10) ** -35)


def test_power_terms_extraction():
    ast = parse_expression("(8/3*x^(3/2) - 2*x^(1/2))/gamma(1/2) - x/1260")
    terms = power_terms(ast)
    assert terms is not None
    got = sorted((e, as_mpf(evaluate(c))) for c, e in terms)
    assert [e for e, _ in got] == [Fraction(1, 2), Fraction(1), Fraction(3, 2)]
    assert_close(got[0][1], -2 / mp.gamma(mp.mpf("0.5")), mp.mpf(10) ** -35)
    assert_close(got[1][1], Fraction(-1, 1260), mp.mpf(10) ** -35)
    assert_close(got[2][1], 8 / (3 * mp.gamma(mp.mpf("0.5"))), mp.mpf(10) ** -35)


def test_power_terms_none_for_transcendental():
    assert power_terms(parse_expression("exp(x)*erf(sqrt(x))")) is None
    assert power_terms(parse_expression("(exp(x+2)-1)/(x+2)")) is None


def test_power_terms_sqrt_of_power():
    terms = power_terms(parse_expression("sqrt(x^3)"))
    assert terms is not None and terms[0][1] == Fraction(3, 2)


def test_symbolic_derivative_chain():
    ast = parse_expression("exp(x)*erf(sqrt(x))")
    d = as_callable(derivative(ast), ("x",))
    x = mp.mpf("0.36")
    want = mp.diff(lambda t: mp.exp(t) * mp.erf(mp.sqrt(t)), x)
    assert_close(d(x), want, mp.mpf(10) ** -25)


def test_symbolic_derivative_power_and_div():
    ast = parse_expression("(exp(x+2)-1)/(x+2)")
    d = as_callable(derivative(ast), ("x",))
    x = mp.mpf("0.7")
    want = mp.diff(lambda t: (mp.exp(t + 2) - 1) / (t + 2), x)
    assert_close(d(x), want, mp.mpf(10) ** -25)


def test_taylor_series_polynomial_exact():
    series = taylor_series_2d(parse_expression("(x + t)^2"), 4)
    assert series[(2, 0)] == 1 and series[(1, 1)] == 2 and series[(0, 2)] == 1


def test_taylor_series_exp_diagonal():
    series = taylor_series_2d(parse_expression("exp(x*t)"), 8)
    from math import factorial
    for n in range(5):
        assert series[(n, n)] == Fraction(1, factorial(n))


def test_taylor_series_division():
    # 1/(1 + x*t) = sum (-1)^n (x t)^n
    series = taylor_series_2d(parse_expression("1/(1 + x*t)"), 8)
    for n in range(5):
        assert series[(n, n)] == (-1) ** n


def test_taylor_series_rejects_singular_division():
    with pytest.raises(ValidationError):
        taylor_series_2d(parse_expression("1/(x*t)"), 4)


def test_kernel_spec_polynomial_detection():
    spec = kernel_spec_from_ast(parse_expression("x*t"), mp.mpf(10) ** -20)
    assert spec.form == "POLYNOMIAL"
    assert spec.grid[1][1] == 1


def test_kernel_spec_analytic_bound():
    spec = kernel_spec_from_ast(parse_expression("exp(x*t)"), mp.mpf(10) ** -20,
                                expr_text="exp(x*t)")
    assert spec.form == "ANALYTIC"
    assert as_mpf(spec.truncation_bound) <= mp.mpf(10) ** -20
    # grid reproduces the kernel within the reported bound on a sample
    for xi in (0, mp.mpf("0.5"), 1):
        for ti in (0, mp.mpf("0.7"), 1):
            grid_val = sum(as_mpf(c) * xi ** i * ti ** j
                           for i, row in enumerate(spec.grid)
                           for j, c in enumerate(row) if c != 0)
            assert abs(grid_val - mp.exp(xi * ti)) <= as_mpf(spec.truncation_bound)


def test_variable_exponent_rejected():
    with pytest.raises(ValidationError):
        derivative(parse_expression("x^x"))
