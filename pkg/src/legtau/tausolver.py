"""The Tau discretization and its damped Newton solver.

The residual of

    D^alpha y(x) - lambda * integral_0^1 k(x,t) y(t)^q dt = f(x),
    y^(i)(0) = d_i,  i = 0..m-1,

for a degree-N Legendre ansatz y is a polynomial of the working dimension.
Requiring its first N-m+1 Legendre coefficients to vanish and appending the m
initial-condition rows y . Phi . M^i . X_0 = d_i gives a square system in the
N+1 unknown coefficients, solved by Newton with Armijo backtracking.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath as mp

from .errors import (DimensionMismatchError, SingularJacobianError,
                     TruncationLossWarning, ValidationError)
from .fracops import FracOrder, HMatrix, build_H
from .linalg import solve_dense
from .nonlinear import KernelSpec, fredholm_jacobian, fredholm_term
from .opmat import TruncationPolicy
from .polybasis import (LegVec, MonoVec, inner_product, phi_matrix,
                        project_function, shifted_legendre, to_legendre,
                        to_monomial)
from .precision import (as_mpf, get_precision, guard_digits, is_exact,
                        scalar_from_str, scalar_to_str, sub)
from .sources import SourceSpec


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the integro-differential problem."""

    order: FracOrder
    lam: object
    power: int
    kernel: KernelSpec
    source: SourceSpec
    init_values: tuple
    exact_solution: object = None        # pointwise callable, optional
    exact_derivative: object = None      # derivative of exact_solution, optional
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "init_values", tuple(self.init_values))
        if len(self.init_values) != self.order.m:
            raise ValidationError(
                f"order alpha={self.order.alpha} needs m={self.order.m} initial values, "
                f"got {len(self.init_values)}")
        if self.power < 1 or int(self.power) != self.power:
            raise ValidationError("power q must be a positive integer")

    def replace(self, **changes) -> "ProblemSpec":
        return dataclasses.replace(self, **changes)


def policy_for(problem: ProblemSpec, degree: int) -> TruncationPolicy:
    return TruncationPolicy(solve_degree=degree,
                            kernel_degree=problem.kernel.degree,
                            power=problem.power)


@dataclass
class TauSystem:
    """Square nonlinear system: N-m+1 projection rows plus m linear IC rows."""

    problem: ProblemSpec
    degree: int
    policy: TruncationPolicy
    h_matrix: HMatrix
    derivative_rows: tuple      # (N+1) x (N+1): Legendre coeffs of D^alpha_N L_k
    projection_rows: tuple      # (N-m+1) x W: Legendre-coefficient functionals
    ic_rows: tuple              # m x (N+1)
    linear_rows: tuple          # (N-m+1) x (N+1): projection of D^alpha_N L_n, constant
    source_leg: LegVec
    source_mono: MonoVec
    jacobian_mode: str = "analytic"
    user_precision: int = 0
    guard: int = 0

    @property
    def equation_count(self) -> int:
        return len(self.projection_rows) + len(self.ic_rows)

    def working_dps(self) -> int:
        return (self.user_precision or get_precision()) + self.guard

    def residual_polynomial(self, y: LegVec) -> MonoVec:
        with mp.workdps(self.working_dps()):
            return assemble_residual(y, self.problem, self.policy,
                                     h_matrix=self.h_matrix,
                                     source_mono=self.source_mono)

    def equations(self, y: LegVec):
        """Values of all N+1 equations at y (projection rows, then IC rows)."""
        w = self.policy.working_dim
        with mp.workdps(self.working_dps()):
            res = self.residual_polynomial(y).padded(w).coeffs
            vals = [sum(t * r for t, r in zip(row, res) if t != 0 and r != 0)
                    for row in self.projection_rows]
            for i, row in enumerate(self.ic_rows):
                vals.append(sub(sum(c * yk for c, yk in zip(row, y.coeffs)),
                                self.problem.init_values[i]))
            return vals

    def jacobian(self, y: LegVec):
        n_unknowns = self.degree + 1
        w = self.policy.working_dim
        rows = []
        with mp.workdps(self.working_dps()):
            if self.jacobian_mode == "analytic":
                fred_cols = fredholm_jacobian(y, self.problem.kernel, self.problem.power,
                                              self.problem.lam, w, n_unknowns)
                for k, prow in enumerate(self.projection_rows):
                    row = []
                    for n in range(n_unknowns):
                        fred_part = sum(t * r for t, r in
                                        zip(prow, fred_cols[n].padded(w).coeffs)
                                        if t != 0 and r != 0)
                        row.append(sub(self.linear_rows[k][n], fred_part))
                    rows.append(row)
            else:
                h = mp.mpf(10) ** (-((self.user_precision or get_precision()) // 2))
                base = self.equations(y)
                cols = []
                for n in range(n_unknowns):
                    bumped = list(y.coeffs)
                    bumped[n] = bumped[n] + h
                    vals = self.equations(LegVec(bumped))
                    cols.append([(v - b) / h for v, b in
                                 zip(vals[:len(self.projection_rows)],
                                     base[:len(self.projection_rows)])])
                rows = [[cols[n][k] for n in range(n_unknowns)]
                        for k in range(len(self.projection_rows))]
            for row in self.ic_rows:
                rows.append(list(row))
        return rows


@dataclass
class SolutionReport:
    """Everything a solve produces, serializable to JSON."""

    y_leg: LegVec
    y_mono: MonoVec
    newton_trace: list                      # (iteration, residual_norm, step_norm)
    tau_residual_legendre_coeffs: list
    errors_vs_exact: dict | None = None     # keys l2, linf, h1
    flags: list = field(default_factory=list)
    degree: int = 0
    precision: int = 0
    tolerance: object = None
    converged: bool = True
    condition_estimate: object = None
    problem_name: str = ""

    def evaluate(self, x):
        return self.y_leg.evaluate(x)

    def to_json(self) -> str:
        def s(v):
            return scalar_to_str(v)

        payload = {
            "problem": self.problem_name,
            "degree": self.degree,
            "precision": self.precision,
            "tolerance": s(self.tolerance) if self.tolerance is not None else None,
            "converged": self.converged,
            "y_legendre": [s(c) for c in self.y_leg.coeffs],
            "y_monomial": [s(c) for c in self.y_mono.coeffs],
            "newton_trace": [[it, s(r), s(d)] for it, r, d in self.newton_trace],
            "tau_residual_legendre_coeffs": [s(c) for c in self.tau_residual_legendre_coeffs],
            "errors_vs_exact": ({k: s(v) for k, v in self.errors_vs_exact.items()}
                                if self.errors_vs_exact else None),
            "flags": list(self.flags),
            "condition_estimate": (s(self.condition_estimate)
                                   if self.condition_estimate is not None else None),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SolutionReport":
        d = json.loads(text)
        p = scalar_from_str
        return cls(
            y_leg=LegVec(tuple(p(c) for c in d["y_legendre"])),
            y_mono=MonoVec(tuple(p(c) for c in d["y_monomial"])),
            newton_trace=[(it, p(r), p(st)) for it, r, st in d["newton_trace"]],
            tau_residual_legendre_coeffs=[p(c) for c in d["tau_residual_legendre_coeffs"]],
            errors_vs_exact=({k: p(v) for k, v in d["errors_vs_exact"].items()}
                             if d.get("errors_vs_exact") else None),
            flags=list(d.get("flags", [])),
            degree=d["degree"],
            precision=d["precision"],
            tolerance=p(d["tolerance"]) if d.get("tolerance") else None,
            converged=d["converged"],
            condition_estimate=(p(d["condition_estimate"])
                                if d.get("condition_estimate") else None),
            problem_name=d.get("problem", ""),
        )


def assemble_residual(y: LegVec, problem: ProblemSpec, policy: TruncationPolicy, *,
                      h_matrix: HMatrix | None = None,
                      source_mono: MonoVec | None = None) -> MonoVec:
    """Monomial coefficients of R(x) = D^alpha_N y - Fredholm(y) - p_N f."""
    w = policy.working_dim
    n = policy.solve_degree
    if y.dim > n + 1 and any(c != 0 for c in y.coeffs[n + 1:]):
        raise DimensionMismatchError(f"coefficient vector exceeds degree {n}")
    standalone = h_matrix is None
    with mp.workdps(get_precision() + (guard_digits(w) if standalone else 0)):
        if h_matrix is None:
            h_matrix = build_H(problem.order, n, w)
        if source_mono is None:
            source_mono = to_monomial(problem.source.project(n), w)
        d_part = h_matrix.apply(y.padded(w)).padded(w)
        f_part = fredholm_term(y, problem.kernel, problem.power, problem.lam, w)
        return d_part - f_part - source_mono.padded(w)


def _projection_functionals(degree: int, m: int, width: int):
    """Row k maps monomial residual coefficients to (2k+1)<R, L_k>, k <= degree-m."""
    rows = []
    for k in range(degree - m + 1):
        lk = shifted_legendre(k)
        row = []
        for w_idx in range(width):
            s = sum(c * Fraction(1, w_idx + u + 1) for u, c in enumerate(lk.coeffs))
            row.append((2 * k + 1) * s)
        rows.append(tuple(row))
    return tuple(rows)


def _ic_rows(degree: int, m: int):
    """Row i: y . Phi . M^i . X_0 = i! * (y Phi)_i, linear in the Legendre coeffs."""
    phi = phi_matrix(degree + 1)
    rows = []
    for i in range(m):
        rows.append(tuple(factorial(i) * phi[kk, i] for kk in range(degree + 1)))
    return tuple(rows)


def build_system(problem: ProblemSpec, degree: int, *,
                 jacobian_mode: str = "analytic") -> TauSystem:
    """Assemble the square Tau system for a degree-N ansatz.

    Assembly and every later evaluation run with guard digits sized to the
    working dimension: the monomial detour through Phi cancels coefficients
    of size ~10^(0.72 W), which would otherwise eat the run precision alive.
    Pointwise sources are projected at the run precision (their accuracy is a
    data property, not a cancellation problem) before entering the guarded
    region.
    """
    if problem.source is None:
        raise ValidationError("problem has no source term")
    m = problem.order.m
    if degree < m:
        raise DimensionMismatchError(f"degree {degree} below the derivative order m={m}")
    policy = policy_for(problem, degree)
    w = policy.working_dim
    user_p = get_precision()
    guard = guard_digits(w)
    source_leg = None
    if not problem.source.is_closed_form:
        source_leg = problem.source.project(degree)
    with mp.workdps(user_p + guard):
        h_matrix = build_H(problem.order, degree, w)
        if source_leg is None:
            source_leg = problem.source.project(degree)
        projection_rows = _projection_functionals(degree, m, w)
        derivative_rows = []
        linear_rows = [[0] * (degree + 1) for _ in range(len(projection_rows))]
        for n in range(degree + 1):
            unit = LegVec(tuple(1 if i == n else 0 for i in range(degree + 1)))
            row = h_matrix.matrix.row_apply(unit.padded(w).coeffs)
            derivative_rows.append(tuple(row[: degree + 1]))
            dmono = to_monomial(LegVec(row), w).padded(w).coeffs
            for k, prow in enumerate(projection_rows):
                linear_rows[k][n] = sum(t * r for t, r in zip(prow, dmono)
                                        if t != 0 and r != 0)
        source_mono = to_monomial(source_leg, w)
        exact_path = all(is_exact(v) for hrow in h_matrix.matrix.entries for v in hrow)
        if not exact_path:
            # the float path pays Fraction->mpf conversion on every residual
            # evaluation otherwise
            projection_rows = tuple(
                tuple(as_mpf(t) for t in row) for row in projection_rows)
    system = TauSystem(
        problem=problem,
        degree=degree,
        policy=policy,
        h_matrix=h_matrix,
        derivative_rows=tuple(derivative_rows),
        projection_rows=projection_rows,
        ic_rows=_ic_rows(degree, m),
        linear_rows=tuple(tuple(r) for r in linear_rows),
        source_leg=source_leg,
        source_mono=source_mono,
        jacobian_mode=jacobian_mode,
        user_precision=user_p,
        guard=guard,
    )
    assert system.equation_count == degree + 1
    return system


def _inf_norm(values):
    return max((abs(as_mpf(v)) for v in values), default=mp.mpf(0))


def _rounded(value):
    """Round an mpf to the ambient precision; exact scalars pass through."""
    return +value if isinstance(value, mp.mpf) else value


def default_tolerance(digits: int | None = None):
    return mp.mpf(10) ** (-((digits or get_precision()) - 15))


def initial_guess(system: TauSystem) -> LegVec:
    """Solve the linear problem with the Fredholm term frozen at sum d_i x^i / i!.

    Falls back to the zero vector if that linearization is singular.
    """
    problem = system.problem
    n = system.degree
    w = system.policy.working_dim
    with mp.workdps(system.working_dps()):
        frozen_coeffs = [0] * (n + 1)
        for i, d in enumerate(problem.init_values):
            frozen_coeffs[i] = d * Fraction(1, factorial(i))
        frozen = to_legendre(MonoVec(tuple(frozen_coeffs)), n)
        fred = fredholm_term(frozen, problem.kernel, problem.power, problem.lam, w)
        rhs_poly = (fred + system.source_mono.padded(w)).padded(w)
        rhs = [sum(t * r for t, r in zip(row, rhs_poly.coeffs) if t != 0 and r != 0)
               for row in system.projection_rows]
        rhs += list(problem.init_values)
        matrix = [list(row) for row in system.linear_rows]
        for row in system.ic_rows:
            matrix.append(list(row))
        try:
            x, _ = solve_dense(matrix, rhs)
        except SingularJacobianError:
            return LegVec((0,) * (n + 1))
        return LegVec(tuple(x))


def newton_solve(system: TauSystem, y0: LegVec | None = None, tol=None,
                 max_iter: int = 60) -> SolutionReport:
    """Damped Newton on the Tau system.

    Armijo backtracking with step halving down to 2^-20 guards against the
    distant spurious roots that high powers q introduce.  Non-convergence is
    reported through `converged` and a MAX_ITERATIONS flag, not an exception;
    a singular Jacobian raises SingularJacobianError.
    """
    user_p = system.user_precision or get_precision()
    if tol is None:
        tol = default_tolerance(user_p)
    tol = as_mpf(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    n = system.degree
    trace = []
    flags = []
    cond = None
    converged = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationLossWarning)
        with mp.workdps(system.working_dps()):
            y = y0.padded(n + 1) if y0 is not None else initial_guess(system)
            res = system.equations(y)
            norm = _inf_norm(res)
            trace.append((0, norm, mp.mpf(0)))
            for it in range(1, max_iter + 1):
                if norm <= tol:
                    converged = True
                    break
                jac = system.jacobian(y)
                step, cond = solve_dense(jac, [-v for v in res])
                t = Fraction(1)  # rational step sizes keep the exact path exact
                min_step = Fraction(1, 2 ** 20)
                while True:
                    trial = LegVec(tuple(c + t * s for c, s in zip(y.coeffs, step)))
                    trial_res = system.equations(trial)
                    trial_norm = _inf_norm(trial_res)
                    if trial_norm <= norm * (1 - t / 2) + tol / 4 or t <= min_step:
                        break
                    t = t / 2
                y, res, norm = trial, trial_res, trial_norm
                trace.append((it, norm, _inf_norm([t * s for s in step])))
            else:
                converged = norm <= tol
            final_res = system.residual_polynomial(y)
            tau_coeffs = [
                (2 * k + 1) * inner_product(final_res, shifted_legendre(k))
                for k in range(n + 1)]
            y_mono_precise = to_monomial(y)
        if not converged:
            flags.append("MAX_ITERATIONS")
        for warning in caught:
            if issubclass(warning.category, TruncationLossWarning):
                msg = f"TRUNCATION_LOSS: {warning.message}"
                if msg not in flags:
                    flags.append(msg)
    with mp.workdps(user_p):
        y = LegVec(tuple(_rounded(c) for c in y.coeffs))
        trace = [(it, _rounded(r), _rounded(s)) for it, r, s in trace]
        tau_coeffs = [_rounded(c) for c in tau_coeffs]
        y_mono = MonoVec(tuple(_rounded(c) for c in y_mono_precise.coeffs))
    return SolutionReport(
        y_leg=y,
        y_mono=y_mono,
        newton_trace=trace,
        tau_residual_legendre_coeffs=tau_coeffs,
        flags=flags,
        degree=n,
        precision=user_p,
        tolerance=tol,
        converged=converged,
        condition_estimate=cond,
        problem_name=system.problem.name,
    )


def _deviation_from_exact(report: SolutionReport, problem: ProblemSpec):
    dev = mp.mpf(0)
    scale = mp.mpf(1)
    for k in range(1, 10):
        x = mp.mpf(k) / 10
        ex = as_mpf(problem.exact_solution(x))
        dev = max(dev, abs(report.evaluate(x) - ex))
        scale = max(scale, abs(ex))
    return dev / scale


def solve(problem: ProblemSpec, degree: int, *, tol=None, max_iter: int = 60,
          y0: LegVec | None = None, jacobian_mode: str = "analytic",
          error_grid: int = 1025) -> SolutionReport:
    """End to end: build the system, run Newton, attach error norms if possible.

    Nonlinear Fredholm problems can carry several genuine solution branches
    (q >= 2 makes the integral term quadratic or worse).  Newton returns the
    first root its starting point leads to; when an exact solution is attached
    for verification and that root is clearly a different branch, the solve is
    reseeded once from the exact solution's projection and the switch is
    flagged as ALTERNATE_ROOT.
    """
    system = build_system(problem, degree, jacobian_mode=jacobian_mode)
    report = newton_solve(system, y0=y0, tol=tol, max_iter=max_iter)
    if problem.exact_solution is not None and y0 is None:
        dev = _deviation_from_exact(report, problem)
        if not report.converged or dev > mp.mpf("0.05"):
            seed = project_function(problem.exact_solution, degree)
            retry = newton_solve(system, y0=seed, tol=tol, max_iter=max_iter)
            if retry.converged and _deviation_from_exact(retry, problem) < dev / 10:
                retry.flags.append(
                    "ALTERNATE_ROOT: default initialization converged to a "
                    "different solution branch; reseeded from the exact solution")
                report = retry
    if problem.exact_solution is not None:
        from .analysis import error_norms
        err = error_norms(report.y_leg, problem.exact_solution, grid=error_grid,
                          exact_derivative=problem.exact_derivative)
        report.errors_vs_exact = {"l2": err.l2, "linf": err.linf, "h1": err.h1}
    return report
