"""Restricted expression language for problem files.

Grammar (deliberately tiny, no user-defined functions):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # also accepts '**'
    atom   := NUMBER | 'x' | 't' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := exp | erf | sqrt | gamma   # gamma only with constant argument

Numbers are rational literals ('2', '1/3', '0.25') and stay exact.  The AST is
plain tuples so it can be hashed, cached and pattern-matched:

    ('num', Fraction) ('var', name) ('add'|'sub'|'mul'|'div'|'pow', a, b)
    ('neg', a) ('call', fname, arg)
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .errors import ParseError, ValidationError
from .precision import as_mpf, div as _safe_div, is_exact, sub as _safe_sub

FUNCTIONS = ("exp", "erf", "sqrt", "gamma")
VARIABLES = ("x", "t")


class _Tokenizer:
    def __init__(self, text, line=None):
        self.text = text
        self.pos = 0
        self.line = line
        self.tokens = []
        self._scan()
        self.index = 0

    def _fail(self, message, col):
        raise ParseError(message, line=self.line, column=col + 1)

    def _scan(self):
        s = self.text
        i = 0
        while i < len(s):
            ch = s[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit() or (ch == "." and i + 1 < len(s) and s[i + 1].isdigit()):
                j = i
                while j < len(s) and (s[j].isdigit() or s[j] == "."):
                    j += 1
                if s.count(".", i, j) > 1:
                    self._fail(f"malformed number {s[i:j]!r}", i)
                self.tokens.append(("num", s[i:j], i))
                i = j
                continue
            if ch.isalpha():
                j = i
                while j < len(s) and s[j].isalnum():
                    j += 1
                self.tokens.append(("name", s[i:j], i))
                i = j
                continue
            if s.startswith("**", i):
                self.tokens.append(("op", "^", i))
                i += 2
                continue
            if ch in "+-*/^()":
                self.tokens.append(("op", ch, i))
                i += 1
                continue
            self._fail(f"unexpected character {ch!r}", i)
        self.tokens.append(("end", "", len(s)))

    def peek(self):
        return self.tokens[self.index]

    def next(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok


class _Parser:
    def __init__(self, text, line=None):
        self.tok = _Tokenizer(text, line)
        self.line = line

    def parse(self):
        node = self._expr()
        kind, value, col = self.tok.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing {value!r}", line=self.line, column=col + 1)
        return node

    def _expr(self):
        node = self._term()
        while True:
            kind, value, _ = self.tok.peek()
            if kind == "op" and value in "+-":
                self.tok.next()
                rhs = self._term()
                node = ("add" if value == "+" else "sub", node, rhs)
            else:
                return node

    def _term(self):
        node = self._unary()
        while True:
            kind, value, _ = self.tok.peek()
            if kind == "op" and value in "*/":
                self.tok.next()
                rhs = self._unary()
                node = ("mul" if value == "*" else "div", node, rhs)
            else:
                return node

    def _unary(self):
        kind, value, _ = self.tok.peek()
        if kind == "op" and value == "-":
            self.tok.next()
            return ("neg", self._unary())
        if kind == "op" and value == "+":
            self.tok.next()
            return self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        kind, value, _ = self.tok.peek()
        if kind == "op" and value == "^":
            self.tok.next()
            return ("pow", base, self._unary())
        return base

    def _atom(self):
        kind, value, col = self.tok.next()
        if kind == "num":
            return ("num", Fraction(value))
        if kind == "name":
            if value in VARIABLES:
                return ("var", value)
            if value in FUNCTIONS:
                k2, v2, c2 = self.tok.next()
                if (k2, v2) != ("op", "("):
                    raise ParseError(f"{value} needs parentheses", line=self.line, column=c2 + 1)
                arg = self._expr()
                k3, v3, c3 = self.tok.next()
                if (k3, v3) != ("op", ")"):
                    raise ParseError("missing ')'", line=self.line, column=c3 + 1)
                return ("call", value, arg)
            raise ParseError(f"unknown name {value!r}", line=self.line, column=col + 1)
        if (kind, value) == ("op", "("):
            node = self._expr()
            k2, v2, c2 = self.tok.next()
            if (k2, v2) != ("op", ")"):
                raise ParseError("missing ')'", line=self.line, column=c2 + 1)
            return node
        raise ParseError(f"unexpected {value!r}", line=self.line, column=col + 1)


def parse_expression(text, line=None):
    return _Parser(text, line).parse()


def free_variables(ast):
    kind = ast[0]
    if kind == "num":
        return set()
    if kind == "var":
        return {ast[1]}
    if kind in ("neg",):
        return free_variables(ast[1])
    if kind == "call":
        return free_variables(ast[2])
    return free_variables(ast[1]) | free_variables(ast[2])


_MP_FUNCS = {"exp": mp.exp, "erf": mp.erf, "sqrt": mp.sqrt, "gamma": mp.gamma}


def evaluate(ast, **values):
    """Evaluate the AST; stays exact on the rational-closed fragment."""
    kind = ast[0]
    if kind == "num":
        v = ast[1]
        return int(v) if v.denominator == 1 else v
    if kind == "var":
        name = ast[1]
        if name not in values:
            raise ValidationError(f"unbound variable {name!r}")
        return values[name]
    if kind == "neg":
        return -evaluate(ast[1], **values)
    if kind == "call":
        arg = evaluate(ast[2], **values)
        return _MP_FUNCS[ast[1]](as_mpf(arg))
    a = evaluate(ast[1], **values)
    b = evaluate(ast[2], **values)
    if kind == "add":
        return a + b
    if kind == "sub":
        return _safe_sub(a, b)
    if kind == "mul":
        return a * b
    if kind == "div":
        return _safe_div(a, b)
    if kind == "pow":
        if is_exact(a) and is_exact(b) and Fraction(b).denominator == 1:
            e = int(Fraction(b))
            return Fraction(a) ** e if e >= 0 else Fraction(1) / Fraction(a) ** (-e)
        return as_mpf(a) ** as_mpf(b)
    raise ValidationError(f"unknown node {kind!r}")


def as_callable(ast, variables=("x",)):
    """Bind the AST into a plain function of the listed variables."""
    names = tuple(variables)
    extra = free_variables(ast) - set(names)
    if extra:
        raise ValidationError(f"expression uses unknown variables {sorted(extra)}")

    def f(*args):
        return evaluate(ast, **dict(zip(names, args)))

    return f


def constant_value(ast):
    """Value of a closed expression, or None if it contains variables."""
    if free_variables(ast):
        return None
    return evaluate(ast)


def derivative(ast, var="x"):
    """Symbolic derivative within the same grammar (gamma arguments are constant)."""
    kind = ast[0]
    if kind == "num":
        return ("num", Fraction(0))
    if kind == "var":
        return ("num", Fraction(1 if ast[1] == var else 0))
    if kind == "neg":
        return ("neg", derivative(ast[1], var))
    if kind == "add" or kind == "sub":
        return (kind, derivative(ast[1], var), derivative(ast[2], var))
    if kind == "mul":
        a, b = ast[1], ast[2]
        return ("add", ("mul", derivative(a, var), b), ("mul", a, derivative(b, var)))
    if kind == "div":
        a, b = ast[1], ast[2]
        num = ("sub", ("mul", derivative(a, var), b), ("mul", a, derivative(b, var)))
        return ("div", num, ("pow", b, ("num", Fraction(2))))
    if kind == "pow":
        base, expo = ast[1], ast[2]
        if free_variables(expo):
            raise ValidationError("variable exponents are outside the grammar")
        new_expo = ("sub", expo, ("num", Fraction(1)))
        return ("mul", ("mul", expo, ("pow", base, new_expo)), derivative(base, var))
    if kind == "call":
        fname, arg = ast[1], ast[2]
        darg = derivative(arg, var)
        if fname == "exp":
            return ("mul", ast, darg)
        if fname == "sqrt":
            return ("div", darg, ("mul", ("num", Fraction(2)), ast))
        if fname == "erf":
            # d/dx erf(u) = (2/sqrt(pi)) exp(-u^2) u'
            two_over_sqrt_pi = ("div", ("num", Fraction(2)),
                                ("call", "gamma", ("num", Fraction(1, 2))))
            gauss = ("call", "exp", ("neg", ("pow", arg, ("num", Fraction(2)))))
            return ("mul", ("mul", two_over_sqrt_pi, gauss), darg)
        if fname == "gamma":
            if free_variables(arg):
                raise ValidationError("gamma is only allowed with constant arguments")
            return ("num", Fraction(0))
    raise ValidationError(f"cannot differentiate node {kind!r}")


def power_terms(ast):
    """Decompose into a list of (coefficient_ast, rational exponent) power terms.

    Succeeds only when the expression is a finite sum of constant * x^e with
    rational e; returns None otherwise (the caller falls back to pointwise
    evaluation).  Coefficient ASTs are kept symbolic so constants such as
    gamma(1/2) are evaluated at whatever precision is active later.
    """
    kind = ast[0]
    if kind in ("num", "call") and not free_variables(ast):
        return [(ast, Fraction(0))]
    if kind == "var":
        if ast[1] != "x":
            return None
        return [(("num", Fraction(1)), Fraction(1))]
    if kind == "neg":
        inner = power_terms(ast[1])
        if inner is None:
            return None
        return [(("neg", c), e) for c, e in inner]
    if kind in ("add", "sub"):
        left = power_terms(ast[1])
        right = power_terms(ast[2])
        if left is None or right is None:
            return None
        if kind == "sub":
            right = [(("neg", c), e) for c, e in right]
        return left + right
    if kind == "mul":
        left = power_terms(ast[1])
        right = power_terms(ast[2])
        if left is None or right is None:
            return None
        return [(("mul", c1, c2), e1 + e2) for c1, e1 in left for c2, e2 in right]
    if kind == "div":
        left = power_terms(ast[1])
        if left is None or free_variables(ast[2]):
            return None
        return [(("div", c, ast[2]), e) for c, e in left]
    if kind == "pow":
        expo = constant_value(ast[2])
        if expo is None or not is_exact(expo):
            return None
        expo = Fraction(expo)
        base = power_terms(ast[1])
        if base is None:
            return None
        if len(base) == 1:
            c, e = base[0]
            return [(("pow", c, ("num", expo)), e * expo)]
        if expo.denominator == 1 and expo >= 0:
            terms = [(("num", Fraction(1)), Fraction(0))]
            for _ in range(int(expo)):
                terms = [(("mul", c1, c2), e1 + e2) for c1, e1 in terms for c2, e2 in base]
            return terms
        return None
    if kind == "call" and free_variables(ast):
        if ast[1] == "sqrt":
            inner = power_terms(ast[2])
            if inner is not None and len(inner) == 1:
                c, e = inner[0]
                return [(("call", "sqrt", c), e / 2)]
        return None
    return None


# --- bivariate truncated Taylor series for kernels ------------------------

def _series_mul(a, b, degree):
    out = {}
    for (i1, j1), c1 in a.items():
        if c1 == 0:
            continue
        for (i2, j2), c2 in b.items():
            if c2 == 0:
                continue
            i, j = i1 + i2, j1 + j2
            if i + j > degree:
                continue
            key = (i, j)
            out[key] = out.get(key, 0) + c1 * c2
    return out


def _series_scale(a, s):
    return {k: s * v for k, v in a.items()}


def _series_add(a, b, sign=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v != 0}


def taylor_series_2d(ast, degree: int):
    """Coefficients {(i,j): c} of the total-degree-`degree` Taylor series in (x,t).

    Supports the arithmetic fragment plus exp; division requires a nonzero
    constant term in the denominator.  sqrt/erf kernels are outside the scope
    of the kernel grammar and raise ValidationError.
    """
    kind = ast[0]
    if kind == "num":
        v = ast[1]
        v = int(v) if v.denominator == 1 else v
        return {(0, 0): v} if v != 0 else {}
    if kind == "var":
        return {(1, 0) if ast[1] == "x" else (0, 1): 1}
    if kind == "neg":
        return _series_scale(taylor_series_2d(ast[1], degree), -1)
    if kind == "add":
        return _series_add(taylor_series_2d(ast[1], degree),
                           taylor_series_2d(ast[2], degree))
    if kind == "sub":
        return _series_add(taylor_series_2d(ast[1], degree),
                           taylor_series_2d(ast[2], degree), sign=-1)
    if kind == "mul":
        return _series_mul(taylor_series_2d(ast[1], degree),
                           taylor_series_2d(ast[2], degree), degree)
    if kind == "pow":
        expo = constant_value(ast[2])
        if expo is None or not is_exact(expo) or Fraction(expo).denominator != 1 or expo < 0:
            raise ValidationError("kernel powers must be nonnegative integers")
        base = taylor_series_2d(ast[1], degree)
        out = {(0, 0): 1}
        for _ in range(int(expo)):
            out = _series_mul(out, base, degree)
        return out
    if kind == "div":
        num = taylor_series_2d(ast[1], degree)
        den = taylor_series_2d(ast[2], degree)
        c0 = den.get((0, 0), 0)
        if c0 == 0:
            raise ValidationError("kernel division needs a nonzero constant denominator term")
        # invert den = c0 (1 + w) by the geometric series in w
        w = _series_scale(_series_add(den, {(0, 0): c0}, sign=-1),
                          Fraction(1, 1) / c0 if is_exact(c0) else 1 / c0)
        inv = {(0, 0): 1}
        poww = {(0, 0): 1}
        for n in range(1, degree + 1):
            poww = _series_mul(poww, w, degree)
            if not poww:
                break
            inv = _series_add(inv, _series_scale(poww, (-1) ** n))
        inv = _series_scale(inv, Fraction(1, 1) / c0 if is_exact(c0) else 1 / c0)
        return _series_mul(num, inv, degree)
    if kind == "call":
        if ast[1] != "exp":
            raise ValidationError(f"{ast[1]} is outside the kernel grammar")
        u = taylor_series_2d(ast[2], degree)
        u0 = u.get((0, 0), 0)
        v = _series_add(u, {(0, 0): u0}, sign=-1)
        out = {(0, 0): 1}
        powv = {(0, 0): 1}
        fact = 1
        for n in range(1, degree + 1):
            powv = _series_mul(powv, v, degree)
            if not powv:
                break
            fact *= n
            out = _series_add(out, _series_scale(powv, Fraction(1, fact)))
        if u0 != 0:
            out = _series_scale(out, mp.exp(as_mpf(u0)))
        return out
    raise ValidationError(f"unsupported kernel node {kind!r}")


def kernel_grid_from_ast(ast, target_bound):
    """Truncated Taylor grid for an analytic kernel with tail bound <= target.

    The sup norm of the dropped tail on [0,1]^2 is bounded by the absolute
    coefficient sum of the next several total degrees (doubled for safety);
    the degree grows until that bound is below `target_bound`.
    """
    target = as_mpf(target_bound)
    guard = 8
    degree = 2
    while degree <= 96:
        series = taylor_series_2d(ast, degree + guard)
        tail = mp.fsum(abs(as_mpf(c)) for (i, j), c in series.items() if i + j > degree)
        bound = 2 * tail
        if bound <= target:
            grid_deg = max([i + j for (i, j), c in series.items() if c != 0 and i + j <= degree],
                           default=0)
            size = grid_deg + 1
            grid = [[0] * size for _ in range(size)]
            for (i, j), c in series.items():
                if i + j <= degree:
                    grid[i][j] = c
            return tuple(tuple(r) for r in grid), bound, degree
        degree += max(2, degree // 4)
    raise ValidationError("kernel Taylor truncation did not reach the requested bound")


def _poly_degree(ast):
    """Total degree when the AST is an exact polynomial in (x,t); else None."""
    kind = ast[0]
    if kind == "num":
        return 0
    if kind == "var":
        return 1
    if kind == "neg":
        return _poly_degree(ast[1])
    if kind in ("add", "sub"):
        a, b = _poly_degree(ast[1]), _poly_degree(ast[2])
        return None if a is None or b is None else max(a, b)
    if kind == "mul":
        a, b = _poly_degree(ast[1]), _poly_degree(ast[2])
        return None if a is None or b is None else a + b
    if kind == "div":
        if free_variables(ast[2]):
            return None
        return _poly_degree(ast[1])
    if kind == "pow":
        expo = constant_value(ast[2])
        if expo is None or not is_exact(expo) or Fraction(expo).denominator != 1 or expo < 0:
            return None
        base = _poly_degree(ast[1])
        return None if base is None else base * int(expo)
    return None  # calls


def kernel_spec_from_ast(ast, target_bound, expr_text=None):
    """Build a KernelSpec from an AST: exact grid when polynomial, Taylor otherwise."""
    from .nonlinear import ANALYTIC, KernelSpec

    degree = _poly_degree(ast)
    if degree is not None:
        series = taylor_series_2d(ast, degree)
        size = degree + 1
        grid = [[0] * size for _ in range(size)]
        for (i, j), c in series.items():
            grid[i][j] = c
        return KernelSpec.polynomial(tuple(tuple(r) for r in grid), expr=expr_text)
    grid, bound, _ = kernel_grid_from_ast(ast, target_bound)
    return KernelSpec(ANALYTIC, grid, bound, as_callable(ast, ("x", "t")), expr_text)
