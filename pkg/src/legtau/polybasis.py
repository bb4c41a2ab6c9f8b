"""Shifted Legendre basis on [0,1]: vectors, the basis-change matrix and projections.

Coefficient vectors are rows multiplying the monomial column X_x = [1, x, x^2, ...]^T.
A polynomial can live in two bases:

* ``MonoVec``  -- coefficients of x^i,
* ``LegVec``   -- coefficients of the shifted Legendre polynomials L_i(x) = P_i(2x-1).

The two are deliberately distinct types; mixing them is the main implementation
hazard of operational methods, so conversions are always explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import mpmath as mp

from .errors import NonConvergedQuadratureError
from .precision import as_mpf, get_precision, is_exact, sub

# Matrix kind tags
PHI, M, N, P, GAMMA, A, H, Y, DELTA, K, GENERIC = (
    "PHI", "M", "N", "P", "GAMMA", "A", "H", "Y", "DELTA", "K", "GENERIC")


def _trimmed(coeffs):
    coeffs = tuple(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    return coeffs


@dataclass(frozen=True)
class MonoVec:
    """Row vector of monomial coefficients: p(x) = sum coeffs[i] * x^i."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def degree(self) -> int:
        for i in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[i] != 0:
                return i
        return 0

    def padded(self, width: int) -> "MonoVec":
        if width < self.dim:
            raise ValueError(f"cannot pad to smaller width {width} < {self.dim}")
        return MonoVec(self.coeffs + (0,) * (width - self.dim))

    def trimmed(self) -> "MonoVec":
        return MonoVec(_trimmed(self.coeffs))

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "MonoVec":
        if self.dim == 1:
            return MonoVec((0,))
        return MonoVec(tuple((i + 1) * self.coeffs[i + 1] for i in range(self.dim - 1)))

    def __add__(self, other):
        if not isinstance(other, MonoVec):
            return NotImplemented
        w = max(self.dim, other.dim)
        a, b = self.padded(w).coeffs, other.padded(w).coeffs
        return MonoVec(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other):
        if not isinstance(other, MonoVec):
            return NotImplemented
        w = max(self.dim, other.dim)
        a, b = self.padded(w).coeffs, other.padded(w).coeffs
        return MonoVec(tuple(sub(x, y) for x, y in zip(a, b)))

    def scaled(self, s) -> "MonoVec":
        return MonoVec(tuple(s * c for c in self.coeffs))


@dataclass(frozen=True)
class LegVec:
    """Row vector of shifted Legendre coefficients: y(x) = sum coeffs[i] * L_i(x)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def degree(self) -> int:
        for i in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[i] != 0:
                return i
        return 0

    def padded(self, width: int) -> "LegVec":
        if width < self.dim:
            raise ValueError(f"cannot pad to smaller width {width} < {self.dim}")
        return LegVec(self.coeffs + (0,) * (width - self.dim))

    def evaluate(self, x):
        # recurrence keeps intermediates O(1); the monomial detour cancels
        # coefficients of size ~10^(0.72 deg)
        basis = evaluate_legendre_basis(self.dim - 1, x)
        return sum(c * b for c, b in zip(self.coeffs, basis))

    def derivative(self) -> "LegVec":
        """Exact derivative in the Legendre basis.

        d/dx L_k = 2 sum_{j < k, k-j odd} (2j+1) L_j on [0,1]; integer weights,
        so the operation is stable and exact for exact inputs.
        """
        n = self.dim - 1
        out = [0] * max(n, 1)
        for j in range(n):
            s = 0
            for k in range(j + 1, n + 1):
                if (k - j) % 2 == 1:
                    s = s + self.coeffs[k]
            out[j] = 2 * (2 * j + 1) * s
        return LegVec(tuple(out))

    def __add__(self, other):
        if not isinstance(other, LegVec):
            return NotImplemented
        w = max(self.dim, other.dim)
        a, b = self.padded(w).coeffs, other.padded(w).coeffs
        return LegVec(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other):
        if not isinstance(other, LegVec):
            return NotImplemented
        w = max(self.dim, other.dim)
        a, b = self.padded(w).coeffs, other.padded(w).coeffs
        return LegVec(tuple(sub(x, y) for x, y in zip(a, b)))

    def scaled(self, s) -> "LegVec":
        return LegVec(tuple(s * c for c in self.coeffs))


@dataclass(frozen=True)
class OpMatrix:
    """Dense square-ish truncation of an infinite operational matrix."""

    entries: tuple
    kind: str = GENERIC

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row_apply(self, vec):
        """Row vector times matrix: returns tuple of length `cols`."""
        vec = tuple(vec)
        if len(vec) != self.rows:
            raise ValueError(f"vector length {len(vec)} != rows {self.rows}")
        out = [0] * self.cols
        for i, v in enumerate(vec):
            if v == 0:
                continue
            row = self.entries[i]
            for j, a in enumerate(row):
                if a != 0:
                    out[j] = out[j] + v * a
        return tuple(out)

    def col_apply(self, vec):
        """Matrix times column vector: returns tuple of length `rows`."""
        vec = tuple(vec)
        if len(vec) != self.cols:
            raise ValueError(f"vector length {len(vec)} != cols {self.cols}")
        return tuple(
            sum(a * v for a, v in zip(row, vec) if a != 0 and v != 0)
            for row in self.entries)

    def __matmul__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        bt = list(zip(*other.entries))
        out = []
        for row in self.entries:
            out.append(tuple(
                sum(a * b for a, b in zip(row, col) if a != 0 and b != 0)
                for col in bt))
        return OpMatrix(tuple(out), GENERIC)

    def transpose(self) -> "OpMatrix":
        return OpMatrix(tuple(zip(*self.entries)), GENERIC)

    @classmethod
    def identity(cls, n: int, kind: str = GENERIC) -> "OpMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)), kind)

    def is_lower_triangular(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.rows) for j in range(i + 1, self.cols))

    def is_upper_triangular(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.rows) for j in range(min(i, self.cols)))

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.rows) for j in range(self.cols) if i != j)

    def is_toeplitz_upper(self) -> bool:
        for i in range(self.rows):
            for j in range(self.cols):
                if j < i:
                    if self.entries[i][j] != 0:
                        return False
                elif i + 1 < self.rows and j + 1 < self.cols:
                    if self.entries[i][j] != self.entries[i + 1][j + 1]:
                        return False
        return True


@lru_cache(maxsize=None)
def shifted_legendre(i: int) -> MonoVec:
    """Exact monomial coefficients of L_i(x) = P_i(2x - 1).

    L_i(x) = sum_k (-1)^(i+k) (i+k)! x^k / ((i-k)! (k!)^2); all entries are integers.
    """
    if i < 0:
        raise ValueError("degree must be nonnegative")
    return MonoVec(tuple(
        (-1) ** (i + k) * factorial(i + k) // (factorial(i - k) * factorial(k) ** 2)
        for k in range(i + 1)))


@lru_cache(maxsize=None)
def phi_matrix(width: int) -> OpMatrix:
    """Lower-triangular basis-change matrix: row i holds shifted_legendre(i)."""
    if width < 1:
        raise ValueError("width must be >= 1")
    rows = []
    for i in range(width):
        c = shifted_legendre(i).coeffs
        rows.append(c + (0,) * (width - len(c)))
    mat = OpMatrix(tuple(rows), PHI)
    assert mat.is_lower_triangular()
    return mat


@lru_cache(maxsize=None)
def phi_inverse(width: int) -> OpMatrix:
    """Exact rational inverse of phi_matrix(width) by forward substitution."""
    phi = phi_matrix(width)
    inv = [[Fraction(0)] * width for _ in range(width)]
    for j in range(width):
        # column j of Phi^-1 solves Phi x = e_j; Phi is unit-free lower triangular
        x = [Fraction(0)] * width
        for i in range(width):
            s = (Fraction(1) if i == j else Fraction(0)) - sum(
                x[r] * phi.entries[i][r] for r in range(i))
            x[i] = s / phi.entries[i][i]
        for i in range(width):
            inv[i][j] = x[i]
    return OpMatrix(tuple(tuple(r) for r in inv), GENERIC)


def inner_product(a: MonoVec, b: MonoVec):
    """Exact L^2(0,1) inner product from monomial coefficients.

    integral_0^1 a(x) b(x) dx = sum_{i,j} a_i b_j / (i + j + 1); exact whenever
    both operands are rational.
    """
    total = 0
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        for j, bj in enumerate(b.coeffs):
            if bj == 0:
                continue
            total = total + ai * bj * Fraction(1, i + j + 1)
    return total


def to_monomial(y: LegVec, width: int | None = None) -> MonoVec:
    """Change of basis LegVec -> MonoVec (y . Phi)."""
    w = max(y.dim, width or 0)
    phi = phi_matrix(w)
    return MonoVec(phi.row_apply(y.padded(w).coeffs))


def legendre_coefficient(p: MonoVec, k: int):
    """k-th shifted Legendre coefficient of a polynomial: (2k+1) <p, L_k>."""
    return (2 * k + 1) * inner_product(p, shifted_legendre(k))


def to_legendre(p: MonoVec, degree: int | None = None) -> LegVec:
    """Change of basis MonoVec -> LegVec.

    With ``degree`` >= deg(p) this is the exact inverse of ``to_monomial`` via
    the triangular solve against Phi; with a smaller ``degree`` it is the exact
    L^2 projection onto polynomials of that degree.
    """
    d = p.degree()
    if degree is None:
        degree = d
    if degree >= d:
        w = degree + 1
        inv = phi_inverse(w)
        return LegVec(inv.row_apply(p.trimmed().padded(w).coeffs))
    return LegVec(tuple(legendre_coefficient(p, k) for k in range(degree + 1)))


def evaluate_legendre_basis(n: int, x):
    """Values [L_0(x), ..., L_n(x)] by the three-term recurrence on 2x-1."""
    t = 2 * x - 1
    vals = [1 if is_exact(t) else mp.mpf(1)]
    if n >= 1:
        vals.append(t)
    for k in range(2, n + 1):
        vals.append(((2 * k - 1) * t * vals[k - 1] - (k - 1) * vals[k - 2]) * Fraction(1, k))
    return vals[: n + 1]


def poly_mul(a: MonoVec, b: MonoVec, width: int | None = None) -> MonoVec:
    """Product of two monomial polynomials, widened to hold every coefficient."""
    out = [0] * (a.dim + b.dim - 1)
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        for j, bj in enumerate(b.coeffs):
            if bj != 0:
                out[i + j] = out[i + j] + ai * bj
    if width is not None:
        out = (out + [0] * width)[:width]
    return MonoVec(tuple(out))


def project_function(f, degree: int, quad_nodes: int | None = None, *,
                     node_cap: int = 512, stabilization: object | None = None) -> LegVec:
    """Degree-``degree`` Legendre projection of a function on [0,1].

    Polynomials (``MonoVec``/``LegVec``) are projected exactly through rational
    inner products.  Callables are integrated with Gauss-Legendre under node
    doubling until no coefficient moves by more than 10^(-p/2); if the doubling
    hits ``node_cap`` without stabilizing (endpoint singularities do this), a
    doubling tanh-sinh rule takes over before giving up.

    Raises NonConvergedQuadratureError when neither rule stabilizes.
    """
    if isinstance(f, LegVec):
        f = to_monomial(f)
    if isinstance(f, MonoVec):
        return to_legendre(f, degree)

    from . import quadrature

    p = get_precision()
    tol = mp.mpf(10) ** (-(p // 2)) if stabilization is None else as_mpf(stabilization)

    def coeffs_at(nodes, weights):
        fv = [f(x) for x in nodes]
        basis = [evaluate_legendre_basis(degree, x) for x in nodes]
        out = []
        for k in range(degree + 1):
            s = mp.fsum(w * fx * bx[k] for w, fx, bx in zip(weights, fv, basis))
            out.append((2 * k + 1) * s)
        return out

    n = quad_nodes or max(2 * (degree + 1), 32)
    prev = coeffs_at(*quadrature.gauss_legendre_rule(n))
    while 2 * n <= node_cap:
        n *= 2
        cur = coeffs_at(*quadrature.gauss_legendre_rule(n))
        if max(abs(a - b) for a, b in zip(cur, prev)) <= tol:
            return LegVec(tuple(cur))
        prev = cur

    # Gauss-Legendre stalls on endpoint singularities; tanh-sinh handles them.
    levels = quadrature.tanh_sinh_levels()
    prev = coeffs_at(*quadrature.tanh_sinh_rule(levels[0]))
    for level in levels[1:]:
        cur = coeffs_at(*quadrature.tanh_sinh_rule(level))
        if max(abs(a - b) for a, b in zip(cur, prev)) <= tol:
            return LegVec(tuple(cur))
        prev = cur
    raise NonConvergedQuadratureError(
        f"projection coefficients did not stabilize to {mp.nstr(tol, 3)}",
        estimate=max(abs(a - b) for a, b in zip(cur, prev)), nodes=node_cap)
