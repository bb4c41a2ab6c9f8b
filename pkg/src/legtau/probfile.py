"""Plain-text problem files: key/value pairs under section headers.

    # comments start with '#'
    [problem]
    alpha  = 1/2          # derivative order, rational or decimal
    lambda = 1            # Fredholm coupling
    q      = 4            # integer power inside the integral
    [kernel]
    expr = x*t
    [source]
    expr = (8/3*x^(3/2) - 2*x^(1/2))/gamma(1/2) - x/1260
    [initial]
    d0 = 0
    [exact]               # optional
    expr = x^2 - x

Expressions use the restricted grammar from `expressions`.  Analytic kernels
(anything beyond a polynomial in x and t) are truncated to a Taylor grid whose
sup-norm tail bound stays below 10^(-p/2) at the active precision, so parsing
happens at solve precision.
"""

from __future__ import annotations

from pathlib import Path

import mpmath as mp

from . import expressions
from .errors import ParseError, ValidationError
from .fracops import FracOrder
from .precision import get_precision, to_number
from .sources import SourceSpec
from .tausolver import ProblemSpec

_SECTIONS = ("problem", "kernel", "source", "initial", "exact")


def _parse_sections(text: str, origin: str):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"{origin}: malformed section header {line!r}", line=lineno)
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise ParseError(f"{origin}: unknown section {name!r}", line=lineno)
            current = sections.setdefault(name, {})
            continue
        if current is None:
            raise ParseError(f"{origin}: content before any section", line=lineno)
        if "=" not in line:
            raise ParseError(f"{origin}: expected key = value", line=lineno)
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if key in current:
            raise ParseError(f"{origin}: duplicate key {key!r}", line=lineno)
        current[key] = (value.strip(), lineno)
    return sections


def _take(section, key, origin, lineno_hint=None, required=True):
    if key not in section:
        if required:
            raise ParseError(f"{origin}: missing key {key!r}", line=lineno_hint)
        return None, None
    return section[key]


def parse_problem_text(text: str, origin: str = "<string>", name: str = "") -> ProblemSpec:
    sections = _parse_sections(text, origin)
    for required in ("problem", "kernel", "source", "initial"):
        if required not in sections:
            raise ParseError(f"{origin}: missing [{required}] section")
    prob = sections["problem"]

    alpha_text, alpha_line = _take(prob, "alpha", origin)
    try:
        alpha = to_number(alpha_text)
    except ValueError as exc:
        raise ParseError(f"{origin}: bad alpha {alpha_text!r}", line=alpha_line) from exc
    try:
        order = FracOrder(alpha)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{origin}: {exc}") from exc

    lam_text, lam_line = _take(prob, "lambda", origin)
    try:
        lam = to_number(lam_text)
    except ValueError as exc:
        raise ParseError(f"{origin}: bad lambda {lam_text!r}", line=lam_line) from exc

    q_text, q_line = _take(prob, "q", origin)
    try:
        q = int(q_text)
    except ValueError as exc:
        raise ParseError(f"{origin}: q must be an integer, got {q_text!r}", line=q_line) from exc
    if q < 1:
        raise ValidationError(f"{origin}: q must be >= 1")

    kexpr, kline = _take(sections["kernel"], "expr", origin)
    try:
        kast = expressions.parse_expression(kexpr, line=kline)
    except ParseError:
        raise
    bad = expressions.free_variables(kast) - {"x", "t"}
    if bad:
        raise ValidationError(f"{origin}: kernel uses unknown variables {sorted(bad)}")
    target = mp.mpf(10) ** (-(get_precision() // 2))
    kernel = expressions.kernel_spec_from_ast(kast, target, expr_text=kexpr)

    sexpr, sline = _take(sections["source"], "expr", origin)
    source_ast = expressions.parse_expression(sexpr, line=sline)
    bad = expressions.free_variables(source_ast) - {"x"}
    if bad:
        raise ValidationError(f"{origin}: source uses unknown variables {sorted(bad)}")
    source = SourceSpec.from_expression(sexpr)

    init_section = sections["initial"]
    values = []
    i = 0
    while f"d{i}" in init_section:
        v_text, v_line = init_section[f"d{i}"]
        try:
            values.append(to_number(v_text))
        except ValueError as exc:
            raise ParseError(f"{origin}: bad initial value {v_text!r}", line=v_line) from exc
        i += 1
    extra = set(init_section) - {f"d{k}" for k in range(i)}
    if extra:
        raise ValidationError(f"{origin}: initial values must be d0, d1, ... got {sorted(extra)}")
    if len(values) != order.m:
        raise ValidationError(
            f"{origin}: alpha={alpha} needs m={order.m} initial values d0..d{order.m - 1}, "
            f"found {len(values)}")

    exact_solution = None
    exact_derivative = None
    if "exact" in sections:
        eexpr, eline = _take(sections["exact"], "expr", origin)
        east = expressions.parse_expression(eexpr, line=eline)
        bad = expressions.free_variables(east) - {"x"}
        if bad:
            raise ValidationError(f"{origin}: exact solution uses unknown variables {sorted(bad)}")
        exact_solution = expressions.as_callable(east, ("x",))
        exact_derivative = expressions.as_callable(expressions.derivative(east), ("x",))

    return ProblemSpec(order=order, lam=lam, power=q, kernel=kernel, source=source,
                       init_values=tuple(values), exact_solution=exact_solution,
                       exact_derivative=exact_derivative, name=name or origin)


def parse_problem_file(path) -> ProblemSpec:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"problem file not found: {path}")
    return parse_problem_text(path.read_text(), origin=str(path), name=path.stem)


def bundled_problem_path(name: str) -> Path:
    """Path of a problem file shipped with the package."""
    here = Path(__file__).parent / "problems"
    path = here / f"{name}.prob"
    if not path.exists():
        raise ParseError(f"no bundled problem named {name!r}")
    return path


def load_bundled(name: str) -> ProblemSpec:
    return parse_problem_file(bundled_problem_path(name))
