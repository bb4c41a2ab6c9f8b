"""Linearization of the nonlinear Fredholm term.

Raising y(x) = y . Phi . X_x to an integer power q rides on the Toeplitz
multiplication matrix Y (X_x y Phi X_x = Y X_x), giving

    y^q(x) = y . Phi . Y^(q-1) . X_x =: b . X_x,

and the Fredholm integral with a polynomial kernel grid K contracts b against
exact moment sums:

    integral_0^1 k(x,t) y^q(t) dt  has x^i coefficient  sum_j K[i][j] * mu_j,
    mu_j = sum_l b_l / (j + l + 1).

The Delta matrix (upper-triangular Toeplitz over b) is exposed for structural
checks, but the solve path contracts b directly; materializing Delta only to
multiply it by moment rows would be O(W^3) for no benefit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .errors import TruncationLossWarning, ValidationError
from .polybasis import (DELTA, K, Y, LegVec, MonoVec, OpMatrix, poly_mul,
                        shifted_legendre, to_monomial)

POLYNOMIAL = "POLYNOMIAL"
ANALYTIC = "ANALYTIC"


def _grid_degrees(grid):
    deg_x = 0
    deg_t = 0
    for i, row in enumerate(grid):
        for j, v in enumerate(row):
            if v != 0:
                deg_x = max(deg_x, i)
                deg_t = max(deg_t, j)
    return deg_x, deg_t


@dataclass(frozen=True)
class KernelSpec:
    """Kernel k(x,t) as a coefficient grid: k = sum K[i][j] x^i t^j.

    POLYNOMIAL grids are exact.  ANALYTIC kernels carry a truncated Taylor
    grid together with the sup-norm bound of the dropped tail on [0,1]^2.
    """

    form: str
    grid: tuple
    truncation_bound: object = 0
    func: object = None
    expr: str | None = None

    def __post_init__(self):
        grid = [list(r) for r in self.grid]
        deg_x, deg_t = _grid_degrees(grid)
        grid = [row[: deg_t + 1] + [0] * max(0, deg_t + 1 - len(row))
                for row in grid[: deg_x + 1]]
        object.__setattr__(self, "grid", tuple(tuple(r) for r in grid))
        if self.form not in (POLYNOMIAL, ANALYTIC):
            raise ValidationError(f"unknown kernel form {self.form!r}")

    @classmethod
    def polynomial(cls, grid, expr=None):
        return cls(POLYNOMIAL, grid, 0, None, expr)

    @property
    def degree_x(self) -> int:
        return _grid_degrees(self.grid)[0]

    @property
    def degree_t(self) -> int:
        return _grid_degrees(self.grid)[1]

    @property
    def degree(self) -> int:
        return max(_grid_degrees(self.grid))

    def evaluate(self, x, t):
        if self.func is not None:
            return self.func(x, t)
        acc = 0
        for i, row in enumerate(self.grid):
            inner = 0
            for j in range(len(row) - 1, -1, -1):
                inner = inner * t + row[j]
            acc = acc + inner * x ** i
        return acc


def kernel_matrix(spec: KernelSpec, width: int) -> OpMatrix:
    """The kernel grid padded to width x width."""
    if spec.degree >= width:
        raise ValidationError(
            f"kernel degree {spec.degree} does not fit working dimension {width}")
    rows = []
    for i in range(width):
        row = spec.grid[i] if i < len(spec.grid) else ()
        rows.append(tuple(row) + (0,) * (width - len(row)))
    return OpMatrix(tuple(rows), K)


def build_Y(y: LegVec, width: int) -> OpMatrix:
    """Upper-triangular Toeplitz multiplication matrix: X_x y Phi X_x = Y X_x.

    With c = y . Phi the entries are Y[i][j] = c_(j-i) for j >= i.
    """
    c = to_monomial(y, width).coeffs[:width]
    rows = []
    for i in range(width):
        rows.append(tuple(0 if j < i else (c[j - i] if j - i < len(c) else 0)
                          for j in range(width)))
    mat = OpMatrix(tuple(rows), Y)
    assert mat.is_toeplitz_upper()
    return mat


def power_coeffs(y: LegVec, q: int, width: int) -> MonoVec:
    """Monomial coefficients of y(x)^q via y . Phi . Y^(q-1).

    Warns with TruncationLossWarning when q*deg(y) overflows the width (the
    truncated product is still returned).
    """
    if q < 1:
        raise ValueError("power must be a positive integer")
    c = to_monomial(y, width)
    if q * c.degree() >= width:
        warnings.warn(
            f"y^{q} has degree {q * c.degree()} >= working dimension {width}",
            TruncationLossWarning, stacklevel=2)
    v = c.padded(width).coeffs[:width]
    if q == 1:
        return MonoVec(v)
    ymat = build_Y(y, width)
    for _ in range(q - 1):
        v = ymat.row_apply(v)
    return MonoVec(v)


@dataclass(frozen=True)
class DeltaMatrix:
    """Upper-triangular Toeplitz matrix over the coefficients of y^q."""

    matrix: OpMatrix
    source: LegVec
    power: int


def build_Delta(y: LegVec, q: int, width: int) -> DeltaMatrix:
    """Delta[i][j] = b_(j-i) for j >= i where b holds the coefficients of y^q."""
    b = power_coeffs(y, q, width).coeffs
    rows = []
    for i in range(width):
        rows.append(tuple(0 if j < i else b[j - i] for j in range(width)))
    mat = OpMatrix(tuple(rows), DELTA)
    assert mat.is_toeplitz_upper()
    return DeltaMatrix(mat, y, q)


def _moment_sums(b, degree_t: int):
    """mu_j = sum_l b_l/(j+l+1) = integral_0^1 t^j * (b . X_t) dt for j <= degree_t."""
    out = []
    for j in range(degree_t + 1):
        s = 0
        for l, bl in enumerate(b):
            if bl != 0:
                s = s + bl * Fraction(1, j + l + 1)
        out.append(s)
    return out


def fredholm_term(y: LegVec, spec: KernelSpec, q: int, lam, width: int) -> MonoVec:
    """Monomial coefficients in x of lambda * integral_0^1 k(x,t) y(t)^q dt."""
    if lam == 0:
        return MonoVec((0,) * width)
    b = power_coeffs(y, q, width).coeffs
    mu = _moment_sums(b, spec.degree_t)
    out = [0] * width
    for i, row in enumerate(spec.grid):
        if i >= width:
            raise ValidationError("kernel x-degree exceeds working dimension")
        acc = 0
        for j, kij in enumerate(row):
            if kij != 0:
                acc = acc + kij * mu[j]
        if acc != 0:
            out[i] = lam * acc
    return MonoVec(tuple(out))


def fredholm_jacobian(y: LegVec, spec: KernelSpec, q: int, lam, width: int,
                      n_unknowns: int):
    """Columns d/dy_n of the Fredholm term, one MonoVec per unknown.

    d/dy_n [lambda * int k(x,t) y^q(t) dt] = lambda * int k(x,t) q y^(q-1)(t) L_n(t) dt,
    assembled from power_coeffs at q-1, the polynomial product with L_n and the
    same moment sums as the term itself.
    """
    cols = []
    if lam == 0:
        zero = MonoVec((0,) * width)
        return [zero] * n_unknowns
    s = power_coeffs(y, q - 1, width) if q > 1 else MonoVec((1,))
    for n in range(n_unknowns):
        bn = poly_mul(s, shifted_legendre(n), width).scaled(q)
        mu = _moment_sums(bn.coeffs, spec.degree_t)
        out = [0] * width
        for i, row in enumerate(spec.grid):
            acc = 0
            for j, kij in enumerate(row):
                if kij != 0:
                    acc = acc + kij * mu[j]
            if acc != 0:
                out[i] = lam * acc
        cols.append(MonoVec(tuple(out)))
    return cols
