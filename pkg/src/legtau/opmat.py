"""Truncations of the infinite differentiation / shift / integration matrices.

For a monomial row vector y (so y(x) = y . X_x):

* ``y . M``   differentiates:      M[i+1][i] = i + 1,
* ``y . N``   multiplies by x:     N[i][i+1] = 1,
* ``y . P``   antidifferentiates:  P[i][i+1] = 1/(i+1),

and the moment row [1, 1/2, ..., 1/W] turns coefficient columns into
integrals over [0,1].  Truncating these matrices can silently drop top-degree
coefficients; every apply-helper here raises TruncationLossWarning instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import TruncationLossWarning
from .polybasis import M, N, P, MonoVec, OpMatrix


@dataclass(frozen=True)
class TruncationPolicy:
    """Working dimension bookkeeping for one solve.

    ``working_dim = power * solve_degree + kernel_degree + 1`` is the monomial
    length needed so that no polynomial on the solve path loses a coefficient
    before its Legendre projection.
    """

    solve_degree: int
    kernel_degree: int
    power: int
    working_dim: int = field(default=0)

    def __post_init__(self):
        if self.solve_degree < 0 or self.kernel_degree < 0 or self.power < 1:
            raise ValueError("invalid truncation policy")
        w = self.power * self.solve_degree + self.kernel_degree + 1
        if self.working_dim == 0:
            object.__setattr__(self, "working_dim", w)
        if self.working_dim < max(w, self.solve_degree + 1):
            raise ValueError(
                f"working dimension {self.working_dim} below required {max(w, self.solve_degree + 1)}")


@lru_cache(maxsize=None)
def build_M(width: int) -> OpMatrix:
    """Differentiation matrix: (y . M) X_x = y'(x)."""
    if width < 1:
        raise ValueError("width must be >= 1")
    rows = [[0] * width for _ in range(width)]
    for i in range(width - 1):
        rows[i + 1][i] = i + 1
    return OpMatrix(tuple(tuple(r) for r in rows), M)


@lru_cache(maxsize=None)
def build_N(width: int) -> OpMatrix:
    """Shift matrix: (y . N) X_x = x * y(x) while the degree fits."""
    if width < 1:
        raise ValueError("width must be >= 1")
    rows = [[0] * width for _ in range(width)]
    for i in range(width - 1):
        rows[i][i + 1] = 1
    return OpMatrix(tuple(tuple(r) for r in rows), N)


@lru_cache(maxsize=None)
def build_P(width: int) -> OpMatrix:
    """Integration matrix: (y . P) X_x is the antiderivative with zero constant."""
    if width < 1:
        raise ValueError("width must be >= 1")
    rows = [[Fraction(0)] * width for _ in range(width)]
    for i in range(width - 1):
        rows[i][i + 1] = Fraction(1, i + 1)
    return OpMatrix(tuple(tuple(r) for r in rows), P)


@lru_cache(maxsize=None)
def moment_vector(width: int) -> MonoVec:
    """Row [1, 1/2, ..., 1/width]: entry i integrates t^i over [0,1]."""
    if width < 1:
        raise ValueError("width must be >= 1")
    return MonoVec(tuple(Fraction(1, i + 1) for i in range(width)))


def _warn_loss(op: str, coeff):
    warnings.warn(
        f"{op} dropped a nonzero top coefficient ({coeff!r}) beyond the working dimension",
        TruncationLossWarning, stacklevel=3)


def differentiate(y: MonoVec, times: int = 1) -> MonoVec:
    """y . M^times within the same width; differentiation never truncates."""
    mat = build_M(y.dim)
    coeffs = y.coeffs
    for _ in range(times):
        coeffs = mat.row_apply(coeffs)
    return MonoVec(coeffs)


def shift_by_x(y: MonoVec, power: int = 1) -> MonoVec:
    """y . N^power; warns on TruncationLossWarning when the degree overflows."""
    mat = build_N(y.dim)
    coeffs = y.coeffs
    for _ in range(power):
        if coeffs[-1] != 0:
            _warn_loss("multiplication by x", coeffs[-1])
        coeffs = mat.row_apply(coeffs)
    return MonoVec(coeffs)


def antiderivative(y: MonoVec) -> MonoVec:
    """y . P with zero constant term; warns when the top coefficient is lost."""
    if y.coeffs[-1] != 0:
        _warn_loss("integration", y.coeffs[-1])
    return MonoVec(build_P(y.dim).row_apply(y.coeffs))


def definite_integral(y: MonoVec, a, b):
    """integral_a^b y(t) dt = (y.P) X_b - (y.P) X_a, widened so nothing truncates."""
    anti = MonoVec(build_P(y.dim + 1).row_apply(y.padded(y.dim + 1).coeffs))
    return anti.evaluate(b) - anti.evaluate(a)
