"""Caputo fractional calculus on the operational side, plus a quadrature oracle.

The Caputo derivative of order ``alpha`` (with m = ceil(alpha)) acts on a
shifted-Legendre coefficient row y through a single matrix

    H = Phi . M^m . Gamma . A,

where Gamma is diagonal with Gamma(i+1)/Gamma(m-alpha+i+1) and row j of A
holds the degree-N Legendre projection of x^(m-alpha+j).  ``caputo_oracle``
evaluates the same derivative by direct quadrature of the defining integral
and never touches the matrices; it exists so the two routes can be checked
against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import mpmath as mp

from . import quadrature
from .polybasis import (A, GAMMA, H, LegVec, MonoVec, OpMatrix, phi_matrix,
                        shifted_legendre, to_monomial)
from .precision import as_mpf, get_precision, is_exact


@dataclass(frozen=True)
class FracOrder:
    """Derivative order alpha > 0 together with m, the smallest integer >= alpha."""

    alpha: object
    m: int = 0

    def __post_init__(self):
        a = self.alpha
        if isinstance(a, float):
            raise TypeError("pass the order as int, Fraction or mpf, not float")
        if a <= 0:
            raise ValueError("order must be positive")
        if self.m == 0:
            if is_exact(a):
                m = -((-Fraction(a).numerator) // Fraction(a).denominator)
            else:
                m = int(mp.ceil(a))
            object.__setattr__(self, "m", m)
        if not (self.m - 1 < a <= self.m):
            raise ValueError(f"m={self.m} is not the ceiling of alpha={a}")

    @property
    def is_integer(self) -> bool:
        return (is_exact(self.alpha) and Fraction(self.alpha).denominator == 1) or (
            not is_exact(self.alpha) and mp.isint(self.alpha))

    @property
    def m_minus_alpha(self):
        return self.m - self.alpha


def gamma_ratio(numerator, denominator):
    """Gamma(numerator)/Gamma(denominator), exact for positive integer arguments.

    A nonpositive-integer denominator is a Gamma pole, so the ratio is 0.
    """
    if is_exact(numerator) and is_exact(denominator):
        fn, fd = Fraction(numerator), Fraction(denominator)
        if fd.denominator == 1 and fd <= 0:
            return 0
        if fn.denominator == 1 and fd.denominator == 1 and fn > 0 and fd > 0:
            return Fraction(factorial(int(fn) - 1), factorial(int(fd) - 1))
    return mp.gamma(as_mpf(numerator)) * mp.rgamma(as_mpf(denominator))


def caputo_monomial(beta, order: FracOrder):
    """Caputo derivative of x^beta: (coefficient, exponent).

    Integer beta below m is annihilated; otherwise the image is
    Gamma(beta+1)/Gamma(beta-alpha+1) * x^(beta-alpha).
    """
    if beta < 0:
        raise ValueError("exponent must be nonnegative")
    beta_int = (is_exact(beta) and Fraction(beta).denominator == 1) or (
        not is_exact(beta) and mp.isint(beta))
    if beta_int and beta < order.m:
        return 0, beta
    coef = gamma_ratio(beta + 1, beta - order.alpha + 1)
    return coef, beta - order.alpha


def gamma_matrix(order: FracOrder, width: int) -> OpMatrix:
    """Diagonal matrix with entries Gamma(i+1)/Gamma(m - alpha + i + 1)."""
    if width < 1:
        raise ValueError("width must be >= 1")
    rows = [[0] * width for _ in range(width)]
    for i in range(width):
        rows[i][i] = gamma_ratio(i + 1, order.m_minus_alpha + i + 1)
    mat = OpMatrix(tuple(tuple(r) for r in rows), GAMMA)
    assert mat.is_diagonal()
    return mat


@lru_cache(maxsize=None)
def _power_projection_cached(exponent, degree: int, prec: int):
    out = []
    for i in range(degree + 1):
        row = shifted_legendre(i).coeffs
        s = 0
        for k, c in enumerate(row):
            s = s + c / (exponent + k + 1)
        out.append((2 * i + 1) * s)
    return tuple(out)


def fractional_power_projection(exponent, degree: int) -> LegVec:
    """Degree-`degree` Legendre projection of x^exponent on [0,1].

    Closed form from the analytic Legendre coefficients:
    a_i = (2i+1) * sum_k phi[i][k] / (exponent + k + 1); exact rationals for
    rational exponents, and the exact finite expansion for integer exponents
    up to `degree`.  Requires exponent > -1/2 for square-integrability.
    """
    if 2 * exponent <= -1:
        raise ValueError("exponent must exceed -1/2")
    if is_exact(exponent):
        key = Fraction(exponent)
        prec = 0  # exact path does not depend on precision
    else:
        key = +as_mpf(exponent)
        prec = mp.mp.prec
    return LegVec(_power_projection_cached(key, degree, prec))


def build_A(order: FracOrder, degree: int, width: int) -> OpMatrix:
    """Row j holds the degree-`degree` projection of x^(m - alpha + j), padded."""
    if width < degree + 1:
        raise ValueError("width must cover the projection degree")
    rows = []
    for j in range(width):
        pj = fractional_power_projection(order.m_minus_alpha + j, degree).coeffs
        rows.append(pj + (0,) * (width - len(pj)))
    return OpMatrix(tuple(rows), A)


@dataclass(frozen=True)
class HMatrix:
    """Operational Caputo derivative: D^alpha y ~ (y . H . Phi) X_x."""

    matrix: OpMatrix
    order: FracOrder
    degree: int  # projection degree used for the A factor

    @property
    def width(self) -> int:
        return self.matrix.rows

    def apply(self, y: LegVec) -> MonoVec:
        """Monomial coefficients of the projected Caputo derivative of y."""
        leg = LegVec(self.matrix.row_apply(y.padded(self.width).coeffs))
        return to_monomial(leg)


def build_H(order: FracOrder, degree: int, width: int) -> HMatrix:
    """Assemble H = Phi . M^m . Gamma . A at the given working dimension.

    The product is composed structurally: (Phi M^m)[i][j] = phi[i][j+m] * (j+m)!/j!
    kills everything above column i-m, so the assembly is O(W^2 N) instead of
    three dense W^3 products.
    """
    m = order.m
    phi = phi_matrix(width)
    a_mat = build_A(order, degree, width)
    gammas = [gamma_ratio(j + 1, order.m_minus_alpha + j + 1) for j in range(width)]
    rows = []
    for i in range(width):
        acc = [0] * width
        for j in range(max(0, i - m) + 1):
            if j + m > i:
                break
            t = phi[i, j + m] * Fraction(factorial(j + m), factorial(j)) * gammas[j]
            if t == 0:
                continue
            arow = a_mat.entries[j]
            for col in range(degree + 1):
                if arow[col] != 0:
                    acc[col] = acc[col] + t * arow[col]
        rows.append(tuple(acc))
    return HMatrix(OpMatrix(tuple(rows), H), order, degree)


def caputo_polynomial_exact(p: MonoVec, order: FracOrder):
    """Term-by-term Caputo image of a polynomial: list of (coefficient, exponent).

    This is the unprojected closed form; it is what the H route approximates
    after projecting each fractional power to the working degree.
    """
    terms = []
    for beta, c in enumerate(p.coeffs):
        if c == 0:
            continue
        coef, expo = caputo_monomial(beta, order)
        if coef != 0:
            terms.append((c * coef, expo))
    return terms


def nth_derivative(f, x, n: int):
    """n-th derivative of a callable at x by mpmath's stepped finite differences."""
    if n == 0:
        return f(as_mpf(x))
    return mp.diff(f, as_mpf(x), n)


def caputo_oracle(f, order: FracOrder, x, *, derivative=None, tol=None):
    """Caputo derivative of a callable at x by direct quadrature.

    Computes J^(m-alpha) applied to the m-th derivative of f (supplied
    analytically via `derivative` or formed by high-order finite differences).
    Never touches the operational matrices; used as an independent oracle.
    """
    x = as_mpf(x)
    if x < 0 or x > 1:
        raise ValueError("oracle is defined on [0,1]")
    if tol is None:
        tol = mp.mpf(10) ** (-max(get_precision() // 3, 10))
    m = order.m
    if derivative is not None:
        g = derivative
    else:
        g = lambda t: nth_derivative(f, t, m)
    if order.is_integer:
        return as_mpf(g(x))
    if x == 0:
        return mp.mpf(0)
    return quadrature.fractional_integral(g, order.m_minus_alpha, x, tol=tol)


def fractional_integral_power(exponent, nu):
    """Closed-form J^nu x^e = Gamma(e+1)/Gamma(e+1+nu) x^(e+nu): (coef, exponent)."""
    if exponent <= -1:
        raise ValueError("exponent must exceed -1")
    return gamma_ratio(exponent + 1, exponent + 1 + nu), exponent + nu
