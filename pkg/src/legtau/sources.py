"""Source terms f(x): closed-form fractional-power sums and pointwise callables.

The solver wants the degree-N Legendre projection of f.  When f is a finite
sum of c * x^e terms the projection is done term by term through the same
closed-form power projections the derivative matrix uses, which makes the two
sides of the discrete equation cancel exactly on exact solutions.  Everything
else is projected by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import expressions
from .errors import ValidationError
from .fracops import fractional_integral_power, fractional_power_projection
from .polybasis import LegVec, MonoVec, project_function
from .precision import as_mpf, is_exact


@dataclass(frozen=True)
class PowerTerm:
    """One term c * x^e; the coefficient may be a deferred constant expression."""

    coefficient: object  # Scalar or expression AST evaluated lazily
    exponent: object     # Fraction or mpf, > -1/2

    def coefficient_value(self):
        c = self.coefficient
        if isinstance(c, tuple):  # expression AST
            return expressions.evaluate(c)
        return c


@dataclass(frozen=True)
class SourceSpec:
    """A source f given as power terms, a pointwise callable, or both."""

    terms: tuple | None = None
    func: object = None
    expr: str | None = None

    def __post_init__(self):
        if self.terms is None and self.func is None:
            raise ValidationError("source needs a closed form or a callable")
        if self.terms is not None:
            object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def is_closed_form(self) -> bool:
        return self.terms is not None

    @classmethod
    def from_terms(cls, terms, expr=None):
        return cls(tuple(PowerTerm(c, e) for c, e in terms), None, expr)

    @classmethod
    def from_function(cls, func, expr=None):
        return cls(None, func, expr)

    @classmethod
    def from_expression(cls, text):
        ast = expressions.parse_expression(text)
        unknown = expressions.free_variables(ast) - {"x"}
        if unknown:
            raise ValidationError(f"source uses unknown variables {sorted(unknown)}")
        terms = expressions.power_terms(ast)
        func = expressions.as_callable(ast, ("x",))
        if terms is not None:
            return cls(tuple(PowerTerm(c, e) for c, e in terms), func, text)
        return cls(None, func, text)

    def evaluate(self, x):
        if self.func is not None:
            return self.func(x)
        acc = mp.mpf(0)
        xm = as_mpf(x)
        for t in self.terms:
            c = as_mpf(t.coefficient_value())
            e = t.exponent
            if xm == 0:
                acc += c if e == 0 else 0
            else:
                acc += c * (xm ** as_mpf(e))
        return acc

    def project(self, degree: int) -> LegVec:
        """Degree-`degree` Legendre projection of f."""
        if self.terms is not None:
            total = [0] * (degree + 1)
            for t in self.terms:
                c = t.coefficient_value()
                if c == 0:
                    continue
                proj = fractional_power_projection(t.exponent, degree)
                for i, a in enumerate(proj.coeffs):
                    total[i] = total[i] + c * a
            return LegVec(tuple(total))
        return project_function(self.func, degree)

    def fractional_integral_terms(self, nu):
        """Closed-form J^nu f as power terms, or None when only pointwise."""
        if self.terms is None:
            return None
        out = []
        for t in self.terms:
            coef, expo = fractional_integral_power(t.exponent, nu)
            out.append(PowerTerm(_scaled_coefficient(t.coefficient, coef), expo))
        return tuple(out)


def _scaled_coefficient(coefficient, scale):
    if isinstance(coefficient, tuple):
        value = expressions.evaluate(coefficient)
    else:
        value = coefficient
    if is_exact(value) and is_exact(scale):
        return value * scale
    return as_mpf(value) * as_mpf(scale)


def evaluate_power_terms(terms, x):
    xm = as_mpf(x)
    acc = mp.mpf(0)
    for t in terms:
        c = as_mpf(t.coefficient_value())
        e = t.exponent
        if xm == 0:
            acc += c if e == 0 else 0
        else:
            acc += c * (xm ** as_mpf(e))
    return acc


def polynomial_source(p: MonoVec, expr=None) -> SourceSpec:
    """Wrap an exact polynomial as a closed-form source."""
    terms = [(c, Fraction(i)) for i, c in enumerate(p.coeffs) if c != 0]
    if not terms:
        terms = [(0, Fraction(0))]
    return SourceSpec.from_terms(terms, expr=expr)
