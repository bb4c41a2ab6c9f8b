from fractions import Fraction

import mpmath as mp
import pytest

from legtau import set_precision
from legtau.errors import NonConvergedQuadratureError
from legtau.fracops import (FracOrder, build_A, build_H, caputo_monomial,
                            caputo_oracle, fractional_integral_power,
                            fractional_power_projection, gamma_matrix,
                            gamma_ratio)
from legtau.polybasis import LegVec, MonoVec, project_function, to_legendre
from legtau.precision import as_mpf, get_precision
from legtau.quadrature import fractional_integral

from conftest import assert_close, random_rational_poly, symbolic_derivative


def test_frac_order_ceiling():
    assert FracOrder(Fraction(1, 2)).m == 1
    assert FracOrder(1).m == 1
    assert FracOrder(Fraction(5, 3)).m == 2
    assert FracOrder(2).m == 2
    assert FracOrder(Fraction(1, 2)).is_integer is False
    assert FracOrder(2).is_integer is True
    with pytest.raises(ValueError):
        FracOrder(Fraction(0))
    with pytest.raises(TypeError):
        FracOrder(0.5)


def test_caputo_monomial_annihilates_low_integers():
    coef, _ = caputo_monomial(0, FracOrder(Fraction(1, 2)))
    assert coef == 0
    coef, _ = caputo_monomial(1, FracOrder(Fraction(5, 3)))
    assert coef == 0


def test_caputo_monomial_half_order_of_x():
    coef, expo = caputo_monomial(1, FracOrder(Fraction(1, 2)))
    assert expo == Fraction(1, 2)
    assert_close(coef, 2 / mp.sqrt(mp.pi), mp.mpf(10) ** -35)


def test_caputo_monomial_integer_case():
    coef, expo = caputo_monomial(2, FracOrder(2))
    assert (coef, expo) == (2, 0)


def test_gamma_ratio_pole_gives_zero():
    assert gamma_ratio(Fraction(3, 2), 0) == 0
    assert gamma_ratio(Fraction(3, 2), -2) == 0
    assert gamma_ratio(4, 2) == 6  # 3!/1!


def test_gamma_matrix_values():
    order = FracOrder(Fraction(1, 2))
    g = gamma_matrix(order, 3)
    assert g.is_diagonal()
    assert_close(g[0, 0], 2 / mp.sqrt(mp.pi), mp.mpf(10) ** -35)
    assert_close(g[0, 0], mp.mpf("1.1283791671"), mp.mpf(10) ** -9)
    assert_close(g[1, 1], 4 / (3 * mp.sqrt(mp.pi)), mp.mpf(10) ** -35)
    assert gamma_matrix(FracOrder(2), 3)[0, 0] == 1


def test_fractional_power_projection_half():
    got = fractional_power_projection(Fraction(1, 2), 2)
    assert got.coeffs == (Fraction(2, 3), Fraction(2, 5), Fraction(-2, 21))


def test_fractional_power_projection_integer_exact():
    got = fractional_power_projection(1, 2)
    assert got.coeffs == (Fraction(1, 2), Fraction(1, 2), Fraction(0))


def test_fractional_power_projection_three_halves():
    got = fractional_power_projection(Fraction(3, 2), 1)
    assert got.coeffs == (Fraction(2, 5), Fraction(18, 35))
    # cross-check the closed form against plain quadrature
    quad = project_function(lambda x: x * mp.sqrt(x), 1)
    tol = mp.mpf(10) ** (-(get_precision() // 2) + 2)
    for g, q in zip(got.coeffs, quad.coeffs):
        assert_close(g, q, tol)


def test_fractional_power_projection_rejects_nonintegrable():
    with pytest.raises(ValueError):
        fractional_power_projection(Fraction(-1, 2), 2)


def test_build_a_integer_rows_exact():
    order = FracOrder(1)
    a = build_A(order, 3, 5)
    for j in range(4):
        want = to_legendre(MonoVec((0,) * j + (1,)), 3)
        assert a.entries[j][:4] == want.coeffs


def test_build_a_half_order_first_row():
    a = build_A(FracOrder(Fraction(1, 2)), 2, 4)
    assert a.entries[0][:3] == (Fraction(2, 3), Fraction(2, 5), Fraction(-2, 21))


def test_build_a_rowsums_approach_one():
    # p_N(x^(m-alpha+j)) at x = 1 tends to 1 as N grows
    order = FracOrder(Fraction(1, 2))
    gaps = []
    for n in (8, 16):
        a = build_A(order, n, n + 1)
        gaps.append(max(abs(as_mpf(sum(a.entries[j][: n + 1]) - 1))
                        for j in range(3)))
    assert gaps[1] < gaps[0]


def test_build_h_integer_order_is_exact_derivative():
    h = build_H(FracOrder(1), 3, 7)
    y = to_legendre(MonoVec((0, 0, 1)), 3)   # x^2
    assert h.apply(y).trimmed().coeffs == (0, 2)


def test_build_h_half_order_on_l1():
    set_precision(40)
    h = build_H(FracOrder(Fraction(1, 2)), 2, 6)
    y = LegVec((0, 1, 0))                    # L_1 = 2x - 1
    got = h.matrix.row_apply(y.padded(6).coeffs)
    scale = 4 / mp.sqrt(mp.pi)
    want = (scale * Fraction(2, 3), scale * Fraction(2, 5), scale * Fraction(-2, 21))
    for g, w in zip(got[:3], want):
        assert_close(g, w, mp.mpf(10) ** -35)
    assert all(v == 0 for v in got[3:])


def test_build_h_kills_constants():
    h = build_H(FracOrder(Fraction(1, 2)), 2, 6)
    y = LegVec((1, 0, 0))
    assert all(v == 0 for v in h.matrix.row_apply(y.padded(6).coeffs))


def test_build_h_matches_dense_product():
    from legtau.fracops import gamma_matrix
    from legtau.opmat import build_M
    from legtau.polybasis import phi_matrix
    order = FracOrder(Fraction(1, 2))
    n, w = 3, 6
    h = build_H(order, n, w)
    dense = phi_matrix(w) @ build_M(w) @ gamma_matrix(order, w) @ build_A(order, n, w)
    for i in range(w):
        for j in range(w):
            assert_close(h.matrix[i, j], dense[i, j], mp.mpf(10) ** -30)


def test_caputo_oracle_linear():
    got = caputo_oracle(lambda x: x, FracOrder(Fraction(1, 2)), Fraction(1, 4),
                        derivative=lambda x: mp.mpf(1))
    assert_close(got, 1 / mp.sqrt(mp.pi), mp.mpf(10) ** -12)


def test_caputo_oracle_quadratic_closed_form():
    order = FracOrder(Fraction(1, 2))
    p = MonoVec((0, -1, 1))  # x^2 - x
    d = symbolic_derivative(p)
    for k in (1, 4, 9):
        x = mp.mpf(k) / 10
        got = caputo_oracle(p.evaluate, order, x, derivative=d.evaluate)
        want = (Fraction(8, 3) * x ** mp.mpf("1.5") - 2 * mp.sqrt(x)) / mp.gamma(mp.mpf("0.5"))
        assert_close(got, want, mp.mpf(10) ** -12)


def test_caputo_oracle_constant_is_zero():
    got = caputo_oracle(lambda x: mp.mpf(3), FracOrder(Fraction(3, 4)), mp.mpf("0.5"),
                        derivative=lambda x: mp.mpf(0))
    assert got == 0


def test_caputo_oracle_finite_difference_fallback():
    got = caputo_oracle(lambda x: x * x, FracOrder(Fraction(1, 2)), mp.mpf("0.5"))
    want = gamma_ratio(3, Fraction(5, 2)) * mp.mpf("0.5") ** mp.mpf("1.5")
    assert_close(got, want, mp.mpf(10) ** -10)


def test_h_linearity_is_literal():
    order = FracOrder(Fraction(1, 2))
    h = build_H(order, 4, 7)
    g = LegVec((1, Fraction(1, 2), 0, Fraction(-1, 3), 0))
    f = LegVec((0, 2, Fraction(1, 5), 0, 1))
    combo = LegVec(tuple(3 * a - 2 * b for a, b in zip(g.coeffs, f.coeffs)))
    lhs = h.apply(combo)
    rhs = h.apply(g).scaled(3) - h.apply(f).scaled(2)
    for a, b in zip(lhs.coeffs, rhs.coeffs):
        assert_close(a, b, mp.mpf(10) ** -30)


def test_integer_collapse_random(rng):
    for alpha in (1, 2):
        order = FracOrder(alpha)
        n = 6
        h = build_H(order, n, 2 * n + 1)
        for _ in range(20):
            p = random_rational_poly(rng, n)
            got = h.apply(to_legendre(p, n)).trimmed()
            want = symbolic_derivative(p, alpha).trimmed()
            assert got.coeffs == want.coeffs


def _projection_gap(poly, order, n, x):
    """Bound sum_j |c_j gamma_j| |x^e_j - p_N x^e_j| for the H-route error."""
    d = symbolic_derivative(poly, order.m)
    bound = mp.mpf(0)
    for j, c in enumerate(d.coeffs):
        if c == 0:
            continue
        e = order.m_minus_alpha + j
        gam = gamma_ratio(j + 1, order.m_minus_alpha + j + 1)
        approx = fractional_power_projection(e, n).evaluate(x)
        bound += abs(as_mpf(c) * as_mpf(gam)) * abs(as_mpf(x) ** as_mpf(e) - as_mpf(approx))
    return bound


def test_oracle_agreement_within_measured_projection_error(rng):
    """Generic polynomials: the gap is bounded by the measured projection error."""
    set_precision(50)
    p_digits = get_precision()
    quad_tol = mp.mpf(10) ** (-(p_digits // 3))
    n = 12
    for alpha in (Fraction(1, 2), Fraction(5, 3)):
        order = FracOrder(alpha)
        h = build_H(order, n, n + 8)
        for _ in range(3):
            poly = random_rational_poly(rng, 6)
            y = to_legendre(poly, n)
            route = h.apply(y)
            d = symbolic_derivative(poly, order.m)
            for k in (1, 5, 9):
                x = mp.mpf(k) / 10
                oracle = caputo_oracle(poly.evaluate, order, x, derivative=d.evaluate)
                gap = abs(as_mpf(route.evaluate(x)) - oracle)
                bound = _projection_gap(poly, order, n, x) + quad_tol
                assert gap <= bound * (1 + mp.mpf(10) ** -6) + quad_tol


def test_oracle_gap_shrinks_with_degree(rng):
    set_precision(50)
    order = FracOrder(Fraction(1, 2))
    poly = MonoVec((Fraction(1, 3), Fraction(-1, 2), Fraction(1, 4), Fraction(1, 5)))
    d = symbolic_derivative(poly)
    xs = [mp.mpf(k) / 10 for k in range(1, 10)]
    oracle = {x: caputo_oracle(poly.evaluate, order, x, derivative=d.evaluate)
              for x in xs}
    gaps = []
    for n in (12, 16, 20):
        h = build_H(order, n, n + 4)
        route = h.apply(to_legendre(poly, n))
        gaps.append(max(abs(as_mpf(route.evaluate(x)) - oracle[x]) for x in xs))
    assert gaps[2] < gaps[1] < gaps[0]


def test_fractional_integral_power_rule():
    coef, expo = fractional_integral_power(2, Fraction(1, 2))
    assert expo == Fraction(5, 2)
    assert_close(coef, mp.gamma(3) / mp.gamma(mp.mpf("3.5")), mp.mpf(10) ** -35)


def test_fractional_integral_quadrature_matches_power_rule():
    nu = Fraction(1, 3)
    for x in (mp.mpf("0.3"), mp.mpf("0.8")):
        got = fractional_integral(lambda t: t ** 2, nu, x)
        coef, expo = fractional_integral_power(2, nu)
        assert_close(got, as_mpf(coef) * x ** as_mpf(expo), mp.mpf(10) ** -11)


def test_fractional_integral_converges_or_raises():
    with pytest.raises(NonConvergedQuadratureError):
        # tolerance far below what the requested working precision can deliver
        fractional_integral(lambda t: mp.sin(1 / (t + mp.mpf(10) ** -30)),
                            Fraction(1, 2), mp.mpf("0.9"), tol=mp.mpf(10) ** -40)
