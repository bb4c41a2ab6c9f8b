from fractions import Fraction

import pytest

from legtau.errors import TruncationLossWarning
from legtau.opmat import (TruncationPolicy, antiderivative, build_M, build_N,
                          build_P, definite_integral, differentiate,
                          moment_vector, shift_by_x)
from legtau.polybasis import MonoVec, poly_mul

from conftest import random_rational_poly, symbolic_derivative


def test_truncation_policy_dimension():
    pol = TruncationPolicy(solve_degree=2, kernel_degree=1, power=4)
    assert pol.working_dim == 10
    with pytest.raises(ValueError):
        TruncationPolicy(solve_degree=2, kernel_degree=1, power=4, working_dim=3)


def test_m_differentiates():
    y = MonoVec((0, 0, 1, 0))     # x^2
    assert differentiate(y).coeffs == (0, 2, 0, 0)
    assert differentiate(MonoVec((1, 0, 0, 0))).coeffs == (0, 0, 0, 0)


def test_m_second_derivative_of_cubic():
    # d^2/dx^2 x^3 = 6x, i.e. [0, 6, 0, 0]
    y = MonoVec((0, 0, 0, 1))
    assert differentiate(y, 2).coeffs == (0, 6, 0, 0)


def test_m_matches_symbolic_derivative(rng):
    for _ in range(100):
        p = random_rational_poly(rng, 8)
        r = rng.choice((1, 2, 3))
        got = differentiate(p, r)
        want = symbolic_derivative(p, r).padded(p.dim)
        assert got.coeffs == want.coeffs[: p.dim]


def test_n_shifts():
    assert shift_by_x(MonoVec((1, 0, 0, 0))).coeffs == (0, 1, 0, 0)


def test_n_truncation_flagged():
    with pytest.warns(TruncationLossWarning):
        shift_by_x(MonoVec((0, 0, 0, 1)))


def test_n_squared_example():
    # x^2 (1 + 2x) = x^2 + 2 x^3 within width 5
    got = shift_by_x(MonoVec((1, 2, 0, 0, 0)), 2)
    assert got.coeffs == (0, 0, 1, 2, 0)


def test_n_exact_while_degree_fits(rng):
    for _ in range(60):
        p = random_rational_poly(rng, 5)
        s = rng.choice((1, 2, 3))
        wide = p.padded(p.degree() + s + 1)
        got = shift_by_x(wide, s)
        want = poly_mul(p, MonoVec((0,) * s + (1,)), wide.dim)
        assert got.coeffs == want.coeffs


def test_p_antiderivative():
    assert antiderivative(MonoVec((1, 0, 0, 0))).coeffs == (0, 1, 0, 0)
    assert antiderivative(MonoVec((0, 2, 0, 0))).coeffs == (0, 0, 1, 0)


def test_p_definite_integral_examples(rng):
    assert definite_integral(MonoVec((0, 0, 3, 0)), 1, 1) == 0
    for _ in range(40):
        p = random_rational_poly(rng, 6)
        a = Fraction(rng.randint(0, 9), 9)
        anti = MonoVec((0,) + tuple(c * Fraction(1, i + 1) for i, c in enumerate(p.coeffs)))
        for k in range(20):
            x = Fraction(k, 19)
            assert definite_integral(p, a, x) == anti.evaluate(x) - anti.evaluate(a)


def test_fundamental_theorem(rng):
    for _ in range(60):
        p = random_rational_poly(rng, 6).padded(9)
        assert differentiate(antiderivative(p)).coeffs == p.coeffs


def test_moment_vector():
    assert moment_vector(3).coeffs == (Fraction(1), Fraction(1, 2), Fraction(1, 3))
    assert moment_vector(10).coeffs[-1] == Fraction(1, 10)


def test_moment_vector_quartic_source_value():
    # integral_0^1 t (t^2 - t)^4 dt = 1/1260
    base = MonoVec((0, -1, 1))
    prod = MonoVec((0, 1))
    for _ in range(4):
        prod = poly_mul(prod, base)
    assert prod.dim == 10
    val = sum(m * c for m, c in zip(moment_vector(prod.dim).coeffs, prod.coeffs))
    assert val == Fraction(1, 1260)


def test_moment_vector_zero_polynomial():
    val = sum(m * c for m, c in zip(moment_vector(4).coeffs, (0, 0, 0, 0)))
    assert val == 0


def test_matrix_shapes():
    for build, kind in ((build_M, "M"), (build_N, "N"), (build_P, "P")):
        mat = build(5)
        assert mat.rows == mat.cols == 5
        assert mat.kind == kind
        with pytest.raises(ValueError):
            build(0)
