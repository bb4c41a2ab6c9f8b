"""Runnable identity and property suites behind the `verify` subcommand.

Each check returns a CheckResult; the CLI prints one pass/fail line per check
and the test suite asserts on the same functions, so there is exactly one
implementation of every verification.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import quadrature
from .analysis import sobolev_check
from .errors import TruncationLossWarning
from .fracops import (FracOrder, build_H, caputo_oracle,
                      caputo_polynomial_exact, fractional_integral_power)
from .nonlinear import KernelSpec, build_Delta, build_Y, fredholm_term, power_coeffs
from .opmat import (antiderivative, definite_integral, differentiate,
                    moment_vector, shift_by_x)
from .polybasis import (LegVec, MonoVec, inner_product, phi_matrix, poly_mul,
                        shifted_legendre, to_legendre, to_monomial)
from .precision import as_mpf, get_precision
from .sources import evaluate_power_terms, PowerTerm


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _random_rational_poly(rng, max_degree, max_num=9, max_den=9) -> MonoVec:
    deg = rng.randint(0, max_degree)
    coeffs = [Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
              for _ in range(deg + 1)]
    if all(c == 0 for c in coeffs):
        coeffs[-1] = Fraction(1)
    return MonoVec(tuple(coeffs))


def _symbolic_derivative(p: MonoVec, times=1) -> MonoVec:
    for _ in range(times):
        p = MonoVec(tuple((i + 1) * p.coeffs[i + 1] for i in range(p.dim - 1)) or (0,))
    return p


def _convolution_power(c, q, width):
    out = [1]
    for _ in range(q):
        nxt = [0] * (len(out) + len(c) - 1)
        for i, a in enumerate(out):
            if a == 0:
                continue
            for j, b in enumerate(c):
                if b != 0:
                    nxt[i + j] += a * b
        out = nxt
    return tuple((out + [0] * width)[:width])


def check_orthogonality(max_degree: int = 12) -> CheckResult:
    """<L_i, L_j> = delta_ij / (2i+1) exactly in rational arithmetic."""
    for i in range(max_degree + 1):
        for j in range(max_degree + 1):
            got = inner_product(shifted_legendre(i), shifted_legendre(j))
            want = Fraction(1, 2 * i + 1) if i == j else Fraction(0)
            if got != want:
                return CheckResult("orthogonality", False, f"i={i}, j={j}: {got} != {want}")
    return CheckResult("orthogonality", True, f"exact for all i,j <= {max_degree}")


def check_triangularity(max_width: int = 32) -> CheckResult:
    for w in range(1, max_width + 1):
        if not phi_matrix(w).is_lower_triangular():
            return CheckResult("phi-triangularity", False, f"width {w}")
    return CheckResult("phi-triangularity", True, f"lower triangular up to width {max_width}")


def check_roundtrip(count: int = 200, seed: int = 2024) -> CheckResult:
    """LegVec -> MonoVec -> LegVec is the identity on the exact rational path."""
    rng = random.Random(seed)
    tol = Fraction(1, 10 ** (get_precision() - 5))
    for _ in range(count):
        y = LegVec(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                         for _ in range(rng.randint(1, 13))))
        back = to_legendre(to_monomial(y), y.dim - 1)
        diff = max(abs(a - b) for a, b in zip(y.padded(back.dim).coeffs, back.coeffs))
        if diff > tol:
            return CheckResult("basis-roundtrip", False, f"difference {diff}")
    return CheckResult("basis-roundtrip", True, f"{count} random vectors, exact")


def check_projection_idempotence(seed: int = 7) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(50):
        p = _random_rational_poly(rng, 8)
        n = max(p.degree(), rng.randint(p.degree(), 10))
        proj = to_legendre(p, n)
        back = to_monomial(proj)
        if back.trimmed().coeffs != p.trimmed().coeffs:
            return CheckResult("projection-idempotence", False, str(p))
    return CheckResult("projection-idempotence", True, "50 random polynomials, exact")


def check_derivative_identity(count: int = 100, seed: int = 11) -> CheckResult:
    """y . M^r equals the symbolic r-th derivative exactly."""
    rng = random.Random(seed)
    for _ in range(count):
        p = _random_rational_poly(rng, 8)
        r = rng.choice((1, 2, 3))
        width = p.dim
        lhs = differentiate(p, r)
        rhs = _symbolic_derivative(p, r).padded(width)
        if lhs.coeffs != rhs.coeffs[:width]:
            return CheckResult("derivative-identity", False, f"{p}, r={r}")
    return CheckResult("derivative-identity", True, f"{count} random polynomials, r in 1..3")


def check_shift_identity(count: int = 100, seed: int = 13) -> CheckResult:
    """y . N^s equals x^s y(x) exactly while the degree fits."""
    rng = random.Random(seed)
    for _ in range(count):
        p = _random_rational_poly(rng, 6)
        s = rng.choice((1, 2, 3))
        width = p.degree() + s + 1
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationLossWarning)
            lhs = shift_by_x(p.padded(width), s)
        rhs = tuple([0] * s + list(p.coeffs))[:width]
        if lhs.trimmed().coeffs != MonoVec(rhs).trimmed().coeffs:
            return CheckResult("shift-identity", False, f"{p}, s={s}")
    return CheckResult("shift-identity", True, f"{count} random polynomials, s in 1..3")


def check_integration_identity(count: int = 40, seed: int = 17) -> CheckResult:
    """y.P X_x - y.P X_a equals the exact definite integral at 20 sample points."""
    rng = random.Random(seed)
    for _ in range(count):
        p = _random_rational_poly(rng, 6)
        a = Fraction(rng.randint(0, 9), 9)
        for k in range(20):
            x = Fraction(k, 19)
            got = definite_integral(p, a, x)
            anti = MonoVec((0,) + tuple(c * Fraction(1, i + 1)
                                        for i, c in enumerate(p.coeffs)))
            want = anti.evaluate(x) - anti.evaluate(a)
            if got != want:
                return CheckResult("integration-identity", False, f"{p}, a={a}, x={x}")
    return CheckResult("integration-identity", True, f"{count} polynomials x 20 points, exact")


def check_fundamental_theorem(count: int = 60, seed: int = 19) -> CheckResult:
    """(y.P).M = y exactly for polynomials fitting the width."""
    rng = random.Random(seed)
    for _ in range(count):
        p = _random_rational_poly(rng, 6)
        width = p.degree() + 2
        wide = p.padded(width)
        back = differentiate(antiderivative(wide))
        if back.coeffs != wide.coeffs:
            return CheckResult("fundamental-theorem", False, str(p))
    return CheckResult("fundamental-theorem", True, f"{count} random polynomials, exact")


def check_moment_vector() -> CheckResult:
    mv = moment_vector(10)
    if mv.coeffs != tuple(Fraction(1, i + 1) for i in range(10)):
        return CheckResult("moment-vector", False, "entries wrong")
    # integral_0^1 t (t^2 - t)^4 dt = 1/1260 via the moment row
    p = MonoVec((0, Fraction(1)))
    base = MonoVec((0, Fraction(-1), Fraction(1)))
    prod = p
    for _ in range(4):
        prod = poly_mul(prod, base)
    val = sum(m * c for m, c in zip(moment_vector(prod.dim).coeffs, prod.coeffs))
    if val != Fraction(1, 1260):
        return CheckResult("moment-vector", False, f"got {val}, want 1/1260")
    return CheckResult("moment-vector", True, "entries exact; quartic moment = 1/1260")


def check_power_convolution(count: int = 300, seed: int = 23) -> CheckResult:
    """power_coeffs and Delta match the direct convolution oracle exactly."""
    rng = random.Random(seed)
    for _ in range(count):
        deg = rng.randint(0, 4)
        q = rng.randint(1, 5)
        y = LegVec(tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 5))
                         for _ in range(deg + 1)))
        width = q * deg + 2
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationLossWarning)
            got = power_coeffs(y, q, width).coeffs
            delta = build_Delta(y, q, width)
        want = _convolution_power(to_monomial(y).coeffs, q, width)
        if got != want:
            return CheckResult("power-convolution", False, f"{y}, q={q}")
        if delta.matrix.entries[0] != want:
            return CheckResult("power-convolution", False, f"Delta row 0 mismatch, q={q}")
        for i in range(1, width):
            for j in range(width):
                want_ij = 0 if j < i else want[j - i]
                if delta.matrix.entries[i][j] != want_ij:
                    return CheckResult("power-convolution", False, f"Delta[{i}][{j}]")
    return CheckResult("power-convolution", True, f"{count} random (y, q), exact")


def check_multiplication_matrix(count: int = 60, seed: int = 29) -> CheckResult:
    """Columns of Y X_x reproduce x^i y(x) coefficient-wise."""
    rng = random.Random(seed)
    for _ in range(count):
        deg = rng.randint(0, 2)
        y = LegVec(tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 5))
                         for _ in range(deg + 1)))
        width = deg + 4
        ymat = build_Y(y, width)
        c = to_monomial(y).coeffs
        for i in range(width):
            col = tuple(ymat.entries[i][j] for j in range(width))
            want = tuple([0] * i + list(c) + [0] * width)[:width]
            if col != want:
                return CheckResult("multiplication-matrix", False, f"{y}, row {i}")
    return CheckResult("multiplication-matrix", True, f"{count} random quadratics, exact")


def check_kernel_delta_consistency(count: int = 25, seed: int = 31) -> CheckResult:
    """X_x^T K Delta X_t reproduces k(x,t) y^q(t) at random rational points."""
    rng = random.Random(seed)
    grid = ((Fraction(0), Fraction(0), Fraction(1)),
            (Fraction(0), Fraction(2), Fraction(0)),
            (Fraction(1), Fraction(0), Fraction(0)))  # (x+t)^2
    kernel = KernelSpec.polynomial(grid)
    y = LegVec((Fraction(1, 3), Fraction(1, 2), Fraction(1, 6)))  # x^2
    q = 2
    width = q * 2 + kernel.degree + 1
    delta = build_Delta(y, q, width)
    from .nonlinear import kernel_matrix
    kmat = kernel_matrix(kernel, width)
    for _ in range(count):
        x = Fraction(rng.randint(0, 12), 12)
        t = Fraction(rng.randint(0, 12), 12)
        xs = tuple(x ** i for i in range(width))
        ts = tuple(t ** i for i in range(width))
        # X_x^T K Delta X_t with Delta acting on the integration variable
        xk = kmat.row_apply(xs)
        xkd = delta.matrix.row_apply(xk)
        got = sum(a * b for a, b in zip(xkd, ts))
        want = kernel.evaluate(x, t) * (to_monomial(y).evaluate(t)) ** q
        if got != want:
            return CheckResult("kernel-delta-consistency", False, f"x={x}, t={t}")
    return CheckResult("kernel-delta-consistency", True, f"{count} random points, exact")


def check_fredholm_quadrature(seed: int = 37) -> CheckResult:
    """Operational Fredholm term vs 40-node Gauss-Legendre at 9 sample points."""
    rng = random.Random(seed)
    tol = mp.mpf(10) ** (-(get_precision() // 2))
    grid = ((Fraction(0), Fraction(0), Fraction(1)),
            (Fraction(0), Fraction(2), Fraction(0)),
            (Fraction(1), Fraction(0), Fraction(0)))
    kernel = KernelSpec.polynomial(grid)
    for _ in range(10):
        deg = rng.randint(0, 3)
        q = rng.randint(1, 3)
        y = LegVec(tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 4))
                         for _ in range(deg + 1)))
        width = q * deg + kernel.degree + 2
        term = fredholm_term(y, kernel, q, Fraction(1), width)
        nodes, weights = quadrature.gauss_legendre_rule(40)
        y_mono = to_monomial(y)
        for k in range(1, 10):
            x = mp.mpf(k) / 10
            direct = mp.fsum(w * kernel.evaluate(x, t) * y_mono.evaluate(t) ** q
                             for t, w in zip(nodes, weights))
            if abs(term.evaluate(x) - direct) > tol:
                return CheckResult("fredholm-quadrature", False,
                                   f"x={x}, gap={mp.nstr(abs(term.evaluate(x) - direct), 3)}")
    return CheckResult("fredholm-quadrature", True, "10 random instances x 9 points")


def check_h_linearity(seed: int = 41) -> CheckResult:
    """H is one fixed matrix, so its action is literally linear."""
    rng = random.Random(seed)
    order = FracOrder(Fraction(1, 2))
    h = build_H(order, 6, 9)
    for _ in range(20):
        g = LegVec(tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(7)))
        f = LegVec(tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(7)))
        lam = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        mu = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        combo = LegVec(tuple(lam * a + mu * b for a, b in zip(g.coeffs, f.coeffs)))
        lhs = h.apply(combo)
        rhs = h.apply(g).scaled(lam) + h.apply(f).scaled(mu)
        diff = max(abs(as_mpf(a - b)) for a, b in zip(lhs.coeffs, rhs.coeffs))
        if diff > mp.mpf(10) ** (-(get_precision() - 8)):
            return CheckResult("h-linearity", False, f"gap {mp.nstr(diff, 3)}")
    return CheckResult("h-linearity", True, "20 random combinations")


def check_integer_collapse(seed: int = 43) -> CheckResult:
    """For integer orders the H route is the exact classical derivative."""
    rng = random.Random(seed)
    for alpha in (1, 2):
        order = FracOrder(alpha)
        n = 6
        h = build_H(order, n, 2 * n + 1)
        for _ in range(20):
            p = _random_rational_poly(rng, n)
            y = to_legendre(p, n)
            got = h.apply(y).trimmed()
            want = _symbolic_derivative(p, alpha).trimmed()
            if got.coeffs != want.coeffs:
                return CheckResult("integer-collapse", False, f"alpha={alpha}, {p}")
    return CheckResult("integer-collapse", True, "alpha in {1,2}, 20 polynomials each, exact")


def check_caputo_inversion(seed: int = 47) -> CheckResult:
    """J^alpha D^alpha f = f - sum f^(k)(0) x^k/k! for random polynomials.

    The inner Caputo derivative comes from the quadrature oracle and the outer
    J^alpha from its closed form on power terms, so the identity exercises the
    whole fractional stack to the quadrature tolerance.
    """
    rng = random.Random(seed)
    p_digits = get_precision()
    tol = mp.mpf(10) ** (-(p_digits // 3))
    from math import factorial as fact
    for alpha in (Fraction(1, 2), Fraction(3, 2)):
        order = FracOrder(alpha)
        for _ in range(4):
            p = _random_rational_poly(rng, 6)
            terms = caputo_polynomial_exact(p, order)
            jterms = []
            for coef, expo in terms:
                c2, e2 = fractional_integral_power(expo, alpha) if expo > -1 else (0, 0)
                jterms.append(PowerTerm(as_mpf(coef) * as_mpf(c2), e2))
            for k in range(1, 10):
                x = mp.mpf(k) / 10
                got = evaluate_power_terms(jterms, x)
                tail = sum(as_mpf(_symbolic_derivative(p, kk).evaluate(0))
                           * x ** kk / fact(kk) for kk in range(order.m))
                want = p.evaluate(x) - tail
                if abs(got - want) > tol:
                    return CheckResult(
                        "caputo-inversion", False,
                        f"alpha={alpha}, x={x}, gap={mp.nstr(abs(got - want), 3)}")
    return CheckResult("caputo-inversion", True,
                       "alpha in {1/2, 3/2}, random polynomials, 9 points each")


def check_sobolev(count: int = 100, seed: int = 53) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(count):
        p = _random_rational_poly(rng, 8)
        result = sobolev_check(p, grid=1025)
        if not result.holds:
            return CheckResult("sobolev-inequality", False,
                               f"{p}: lhs={mp.nstr(as_mpf(result.lhs), 5)} "
                               f"rhs={mp.nstr(as_mpf(result.rhs), 5)}")
    return CheckResult("sobolev-inequality", True, f"{count} random polynomials")


def check_oracle_agreement() -> CheckResult:
    """H route vs quadrature oracle on a smooth monomial at a modest degree.

    x^6 keeps the m-th derivative vanishing to fourth order at 0, so the
    degree-10 projections of the fractional powers are accurate well below
    the 1e-6 gate; lower-order data would be limited by projection error
    instead of by the machinery under test.
    """
    n = 10
    tol = mp.mpf(10) ** -6
    for alpha in (Fraction(1, 2), Fraction(5, 3)):
        order = FracOrder(alpha)
        h = build_H(order, n, n + 3)
        p = MonoVec((0, 0, 0, 0, 0, 0, Fraction(1)))  # x^6
        y = to_legendre(p, n)
        route = h.apply(y)
        deriv = _symbolic_derivative(p, order.m)
        for k in (2, 5, 8):
            x = mp.mpf(k) / 10
            oracle = caputo_oracle(p.evaluate, order, x, derivative=deriv.evaluate)
            if abs(route.evaluate(x) - oracle) > tol:
                return CheckResult("oracle-agreement", False,
                                   f"alpha={alpha}, x={x}")
    return CheckResult("oracle-agreement", True, "x^6, alpha in {1/2, 5/3}")


def run_all(fast: bool = False):
    checks = [
        check_orthogonality(),
        check_triangularity(8 if fast else 32),
        check_roundtrip(40 if fast else 200),
        check_projection_idempotence(),
        check_derivative_identity(30 if fast else 100),
        check_shift_identity(30 if fast else 100),
        check_integration_identity(10 if fast else 40),
        check_fundamental_theorem(20 if fast else 60),
        check_moment_vector(),
        check_power_convolution(60 if fast else 300),
        check_multiplication_matrix(20 if fast else 60),
        check_kernel_delta_consistency(),
        check_fredholm_quadrature(),
        check_h_linearity(),
        check_integer_collapse(),
        check_caputo_inversion(),
        check_sobolev(20 if fast else 100),
        check_oracle_agreement(),
    ]
    return checks
