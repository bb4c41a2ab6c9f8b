"""Error measurement, independent solution certificates and convergence sweeps.

Nothing in this module feeds back into the solver; it exists to measure what
the solver produced.  The integral-equation residual is the strongest check:
applying J^alpha to the problem turns it into a fixed-point identity

    y(x) = sum_k d_k x^k/k! + (J^alpha f)(x) + lambda (J^alpha h)(x),
    h(s) = integral_0^1 k(s,t) y(t)^q dt,

that any true solution satisfies exactly, independent of how y_N was found.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath as mp

from . import quadrature
from .errors import ValidationError
from .fracops import caputo_oracle, fractional_integral_power, nth_derivative
from .precision import extra_digits
from .nonlinear import fredholm_term
from .polybasis import (LegVec, MonoVec, inner_product, project_function,
                        to_legendre, to_monomial)
from .precision import as_mpf, get_precision, guard_digits, is_exact
from .sources import PowerTerm, SourceSpec, evaluate_power_terms
from .tausolver import ProblemSpec, policy_for, solve


@dataclass
class ErrorReport:
    l2: object
    linf: object
    h1: object
    seminorms: dict = field(default_factory=dict)
    samples: tuple = ()
    grid: int = 0


def _golden_refine(f, lo, hi, iterations=60):
    """Golden-section maximization of f on [lo, hi]."""
    lo, hi = as_mpf(lo), as_mpf(hi)
    invphi = (mp.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd, f((a + b) / 2))


def sup_norm(f, grid: int = 1025):
    """Dense-sampling sup of |f| on [0,1] with local golden-section refinement."""
    xs = [mp.mpf(i) / (grid - 1) for i in range(grid)]
    vals = [abs(as_mpf(f(x))) for x in xs]
    best = max(range(grid), key=lambda i: vals[i])
    lo = xs[max(best - 1, 0)]
    hi = xs[min(best + 1, grid - 1)]
    return max(vals[best], _golden_refine(lambda x: abs(as_mpf(f(x))), lo, hi))


def _legvec_l2_sq(y: LegVec):
    """Exact ||y||^2 from Legendre coefficients: sum c_j^2 / (2j+1)."""
    total = 0
    for j, c in enumerate(y.coeffs):
        if c != 0:
            total = total + c * c * Fraction(1, 2 * j + 1)
    return total


def error_norms(y_n: LegVec, y_exact, grid: int = 1025, *,
                exact_derivative=None, seminorm_orders=()) -> ErrorReport:
    """L2, sup and H1 norms of y_N - y_exact, plus seminorms of y_N itself.

    Everything runs in the Legendre basis (coefficient norms and derivative
    weights are exact there), so no monomial cancellation enters.  Polynomial
    exact solutions run on the exact rational path; pointwise exact solutions
    integrate by adaptively stabilized quadrature, with their derivative from
    `exact_derivative` or stepped finite differences.
    """
    if grid < 512:
        raise ValidationError("grid must have at least 512 points")
    n = y_n.degree()

    seminorms = {}
    for k in seminorm_orders:
        acc = 0
        d = y_n
        for _ in range(min(k, n)):
            d = d.derivative()
        for i in range(min(k, n), n + 1):
            acc = acc + _legvec_l2_sq(d)
            d = d.derivative()
        seminorms[k] = mp.sqrt(as_mpf(acc)) if acc != 0 else 0

    if isinstance(y_exact, MonoVec):
        y_exact = to_legendre(y_exact)
    if isinstance(y_exact, LegVec):
        diff = y_n - y_exact
        l2_sq = _legvec_l2_sq(diff)
        d_sq = _legvec_l2_sq(diff.derivative())
        l2 = mp.sqrt(as_mpf(l2_sq)) if l2_sq != 0 else 0
        h1 = mp.sqrt(as_mpf(l2_sq + d_sq)) if (l2_sq != 0 or d_sq != 0) else 0
        linf = 0 if all(c == 0 for c in diff.coeffs) else sup_norm(diff.evaluate, grid)
        return ErrorReport(l2=l2, linf=linf, h1=h1, seminorms=seminorms, grid=grid)

    tol = mp.mpf(10) ** (-(get_precision() // 2))

    def e(x):
        return y_n.evaluate(x) - y_exact(x)

    y_n_d = y_n.derivative()

    def e_prime(x):
        if exact_derivative is not None:
            d_ex = exact_derivative(x)
        else:
            d_ex = nth_derivative(y_exact, x, 1)
        return y_n_d.evaluate(x) - d_ex

    l2_sq = quadrature.integrate(lambda x: e(x) ** 2, tol=tol)
    d_sq = quadrature.integrate(lambda x: e_prime(x) ** 2, tol=tol)
    l2 = mp.sqrt(abs(l2_sq))
    h1 = mp.sqrt(abs(l2_sq) + abs(d_sq))
    linf = sup_norm(e, grid)
    step = max(grid // 10, 1)
    samples = tuple((mp.mpf(i) / (grid - 1),
                     y_n.evaluate(mp.mpf(i) / (grid - 1)),
                     y_exact(mp.mpf(i) / (grid - 1)))
                    for i in range(0, grid, step))
    return ErrorReport(l2=l2, linf=linf, h1=h1, seminorms=seminorms,
                       samples=samples, grid=grid)


@dataclass(frozen=True)
class SobolevCheck:
    lhs: object
    rhs: object
    holds: bool


def sobolev_check(e: MonoVec, grid: int = 1025) -> SobolevCheck:
    """Check sup|e| <= sqrt(3) ||e||_L2^(1/2) ||e||_H1^(1/2) on (0,1).

    The constant is (1/(b-a) + 2)^(1/2) on a unit interval.  A violation
    beyond roundoff indicates a quadrature or norm bug, not a sharp input.
    """
    if isinstance(e, LegVec):
        e = to_monomial(e)
    if all(c == 0 for c in e.coeffs):
        return SobolevCheck(0, 0, True)
    lhs = sup_norm(e.evaluate, grid)
    l2_sq = as_mpf(inner_product(e, e))
    h1_sq = l2_sq + as_mpf(inner_product(e.derivative(), e.derivative()))
    rhs = mp.sqrt(3) * mp.sqrt(mp.sqrt(l2_sq)) * mp.sqrt(mp.sqrt(h1_sq))
    slack = 1 + mp.mpf(10) ** (-(get_precision() // 2))
    return SobolevCheck(lhs, rhs, bool(lhs <= rhs * slack))


def _fractional_integral_of_poly(p: MonoVec, alpha):
    """J^alpha of a polynomial as power terms [(coef, exponent)]."""
    terms = []
    for i, c in enumerate(p.coeffs):
        if c == 0:
            continue
        coef, expo = fractional_integral_power(i, alpha)
        terms.append(PowerTerm(c * coef if is_exact(c) and is_exact(coef)
                               else as_mpf(c) * as_mpf(coef), expo))
    return tuple(terms)


def integral_equation_residual(y_n: LegVec, problem: ProblemSpec,
                               grid: int = 257) -> mp.mpf:
    """Max-norm defect of y_N in the equivalent fixed-point integral equation.

    Closed forms are used wherever the data allows (polynomial kernels make h
    a polynomial; power-term sources integrate termwise); otherwise J^alpha
    falls back to singular-endpoint quadrature per grid point.
    """
    if grid < 64:
        raise ValidationError("grid must have at least 64 points")
    alpha = problem.order.alpha
    w = policy_for(problem, max(y_n.degree(), problem.order.m)).working_dim
    quad_tol = mp.mpf(10) ** (-max(get_precision() // 3, 10))

    ic_poly = [0] * max(problem.order.m, 1)
    for k, d in enumerate(problem.init_values):
        ic_poly[k] = d * Fraction(1, factorial(k))
    ic = MonoVec(tuple(ic_poly))

    with extra_digits(guard_digits(w)):
        h_poly = fredholm_term(y_n, problem.kernel, problem.power, 1, w)
        jh_terms = _fractional_integral_of_poly(h_poly, alpha)
    jf_terms = problem.source.fractional_integral_terms(alpha)

    # power-term sums cancel coefficients as large as their biggest term
    scale = mp.mpf(1)
    for terms in (jf_terms or (), jh_terms):
        for t in terms:
            scale = max(scale, abs(as_mpf(t.coefficient_value())))
    eval_guard = max(int(mp.log10(scale)), 0) + 15

    xs = [mp.mpf(i) / (grid - 1) for i in range(grid)]
    worst = mp.mpf(0)
    with extra_digits(eval_guard):
        for x in xs:
            val = y_n.evaluate(x) - ic.evaluate(x)
            if jf_terms is not None:
                val -= evaluate_power_terms(jf_terms, x)
            else:
                val -= quadrature.fractional_integral(problem.source.evaluate, alpha, x,
                                                      tol=quad_tol)
            val -= as_mpf(problem.lam) * evaluate_power_terms(jh_terms, x)
            worst = max(worst, abs(val))
    return +worst


def manufacture_source(y_exact, problem: ProblemSpec, *, m_derivative=None,
                       expansion_degree: int = 48) -> SourceSpec:
    """Regenerate f so that y_exact solves the problem by construction.

    The pointwise route is the definition f = D^alpha y - lambda int k y^q
    evaluated through the quadrature oracle.  When the data is smooth a
    closed-form fractional-power expansion is attached as well: the m-th
    derivative is projected to `expansion_degree`, pushed through the
    termwise J^(m-alpha) rule, and the Fredholm part contracts exactly; the
    solver then projects f spectrally instead of chasing an x^(m-alpha)
    singularity with quadrature.  The two routes are independent and should
    agree to the projection accuracy; checking that is part of the suite.
    """
    order = problem.order
    lam = problem.lam
    q = problem.power
    kernel = problem.kernel

    def fredholm_pointwise(x):
        return quadrature.integrate(
            lambda t: kernel.evaluate(x, t) * y_exact(t) ** q,
            tol=mp.mpf(10) ** (-(get_precision() - 12)))

    def f_pointwise(x):
        x = as_mpf(x)
        dval = caputo_oracle(y_exact, order, x, derivative=m_derivative)
        return dval - as_mpf(lam) * fredholm_pointwise(x)

    terms = None
    try:
        deriv = m_derivative if m_derivative is not None else (
            lambda t: nth_derivative(y_exact, t, order.m))
        g = project_function(deriv, expansion_degree)
        y_proj = project_function(y_exact, expansion_degree)
        w = q * expansion_degree + kernel.degree + 1
        with extra_digits(guard_digits(w)):
            g_mono = to_monomial(g)
            caputo_terms = _fractional_integral_of_poly(g_mono, order.m_minus_alpha)
            fred_poly = fredholm_term(y_proj, kernel, q, lam, w)
            poly_terms = tuple(PowerTerm(-c, Fraction(i))
                               for i, c in enumerate(fred_poly.coeffs) if c != 0)
        terms = caputo_terms + poly_terms
    except Exception:
        terms = None  # fall back to the pointwise-only source
    return SourceSpec(terms=terms, func=f_pointwise, expr=None)


def manufactured_problem(y_exact, problem: ProblemSpec, *, m_derivative=None,
                         exact_derivative=None,
                         expansion_degree: int = 48) -> ProblemSpec:
    """Problem with a regenerated source and y_exact recorded for error norms."""
    src = manufacture_source(y_exact, problem, m_derivative=m_derivative,
                             expansion_degree=expansion_degree)
    return problem.replace(source=src, exact_solution=y_exact,
                           exact_derivative=exact_derivative)


MAX_ERROR = "max_error"
INTEGRAL_RESIDUAL = "integral_residual"


@dataclass
class ConvergenceRow:
    degree: int
    value: object = None
    runtime: float = 0.0
    error: str | None = None


@dataclass
class ConvergenceReport:
    rows: list
    metric: str
    exponential_fit: tuple | None = None   # (slope, intercept, correlation) vs N
    algebraic_fit: tuple | None = None     # same vs log N
    decay_label: str = ""


def _fit_line(xs, ys):
    n = len(xs)
    if n < 2:
        return None
    mx = mp.fsum(xs) / n
    my = mp.fsum(ys) / n
    sxx = mp.fsum((x - mx) ** 2 for x in xs)
    syy = mp.fsum((y - my) ** 2 for y in ys)
    sxy = mp.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0 or syy == 0:
        return None
    slope = sxy / sxx
    corr = sxy / mp.sqrt(sxx * syy)
    return slope, my - slope * mx, corr


def convergence_sweep(problem: ProblemSpec, degrees, metric: str = INTEGRAL_RESIDUAL,
                      **solve_options) -> ConvergenceReport:
    """One solve per degree; per-row failures are recorded and the sweep continues."""
    degrees = list(degrees)
    if degrees != sorted(degrees):
        raise ValidationError("degrees must be sorted ascending")
    if metric == MAX_ERROR and problem.exact_solution is None:
        raise ValidationError("max_error metric needs an exact solution")
    rows = []
    for n in degrees:
        t0 = time.perf_counter()
        try:
            report = solve(problem, n, **solve_options)
            if metric == MAX_ERROR:
                value = report.errors_vs_exact["linf"]
            else:
                value = integral_equation_residual(report.y_leg, problem)
            rows.append(ConvergenceRow(n, value, time.perf_counter() - t0))
        except Exception as exc:  # recorded, sweep continues
            rows.append(ConvergenceRow(n, None, time.perf_counter() - t0, repr(exc)))
    good = [(r.degree, r.value) for r in rows if r.value is not None and r.value > 0]
    exp_fit = alg_fit = None
    label = ""
    if len(good) >= 2:
        floor = mp.mpf(10) ** (-(get_precision() + 10))
        logs = [mp.log(max(as_mpf(v), floor)) for _, v in good]
        ns = [mp.mpf(n) for n, _ in good]
        exp_fit = _fit_line(ns, logs)
        alg_fit = _fit_line([mp.log(n) for n in ns], logs)
        if exp_fit and alg_fit:
            label = ("exponential-like" if abs(exp_fit[2]) >= abs(alg_fit[2])
                     else "algebraic-like")
        elif exp_fit:
            label = "exponential-like"
    return ConvergenceReport(rows=rows, metric=metric, exponential_fit=exp_fit,
                             algebraic_fit=alg_fit, decay_label=label)
