"""legtau: spectral Tau solver for nonlinear Fredholm integro-differential
equations of fractional (Caputo) order on the shifted Legendre basis.

Quick start:

>>> from legtau import load_bundled, solve, set_precision
>>> set_precision(40)
>>> report = solve(load_bundled("example1"), degree=2)
>>> report.y_leg.coeffs  # Legendre coefficients of x^2 - x
"""

from .analysis import (ConvergenceReport, ErrorReport, convergence_sweep,
                       error_norms, integral_equation_residual,
                       manufacture_source, manufactured_problem, sobolev_check)
from .errors import (DimensionMismatchError, LegtauError, MaxIterationsError,
                     NonConvergedQuadratureError, ParseError,
                     SingularJacobianError, TruncationLossWarning,
                     ValidationError)
from .fracops import (FracOrder, HMatrix, build_A, build_H, caputo_monomial,
                      caputo_oracle, fractional_power_projection, gamma_matrix)
from .nonlinear import (DeltaMatrix, KernelSpec, build_Delta, build_Y,
                        fredholm_term, kernel_matrix, power_coeffs)
from .opmat import (TruncationPolicy, build_M, build_N, build_P, moment_vector)
from .polybasis import (LegVec, MonoVec, OpMatrix, inner_product, phi_matrix,
                        project_function, shifted_legendre, to_legendre,
                        to_monomial)
from .precision import get_precision, set_precision, working_precision
from .probfile import load_bundled, parse_problem_file
from .sources import SourceSpec
from .tausolver import (ProblemSpec, SolutionReport, TauSystem,
                        assemble_residual, build_system, newton_solve, solve)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport", "DeltaMatrix", "DimensionMismatchError", "ErrorReport",
    "FracOrder", "HMatrix", "KernelSpec", "LegVec", "LegtauError",
    "MaxIterationsError", "MonoVec", "NonConvergedQuadratureError", "OpMatrix",
    "ParseError", "ProblemSpec", "SingularJacobianError", "SolutionReport",
    "SourceSpec", "TauSystem", "TruncationLossWarning", "TruncationPolicy",
    "ValidationError", "assemble_residual", "build_A", "build_Delta", "build_H",
    "build_M", "build_N", "build_P", "build_Y", "build_system",
    "caputo_monomial", "caputo_oracle", "convergence_sweep", "error_norms",
    "fractional_power_projection", "fredholm_term", "gamma_matrix",
    "inner_product", "integral_equation_residual", "kernel_matrix",
    "load_bundled", "manufacture_source", "manufactured_problem",
    "moment_vector", "newton_solve", "parse_problem_file", "phi_matrix",
    "power_coeffs", "working_precision", "project_function", "set_precision",
    "shifted_legendre", "sobolev_check", "solve", "to_legendre", "to_monomial",
    "get_precision",
]
