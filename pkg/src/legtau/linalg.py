"""Dense linear solves over exact rationals or mpf, with partial pivoting.

Systems here are tiny (N+1 unknowns), so plain Gaussian elimination is fine.
Pivoting compares magnitudes through as_mpf so exact and float entries mix.
"""

from __future__ import annotations

from .errors import SingularJacobianError
from .precision import as_mpf, div, get_precision, sub

import mpmath as mp


def solve_dense(matrix, rhs):
    """Solve A x = b; raises SingularJacobianError with a condition estimate."""
    n = len(matrix)
    a = [list(row) for row in matrix]
    b = list(rhs)
    if any(len(row) != n for row in a) or len(b) != n:
        raise ValueError("system must be square")
    scale = max((abs(as_mpf(v)) for row in a for v in row), default=mp.mpf(0))
    if scale == 0:
        raise SingularJacobianError("zero matrix", condition_estimate=mp.inf)
    pivots = []
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(as_mpf(a[r][col])))
        pmag = abs(as_mpf(a[piv][col]))
        if pmag <= scale * mp.mpf(10) ** (-(get_precision() - 5)):
            cond = scale / pmag if pmag > 0 else mp.inf
            raise SingularJacobianError(
                f"pivot {col} is negligible", condition_estimate=cond)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        pivots.append(pmag)
        inv = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            factor = div(a[r][col], inv)
            for c in range(col, n):
                a[r][c] = sub(a[r][c], factor * a[col][c])
            b[r] = sub(b[r], factor * b[col])
    x = [0] * n
    for r in range(n - 1, -1, -1):
        s = b[r]
        for c in range(r + 1, n):
            s = sub(s, a[r][c] * x[c])
        x[r] = div(s, a[r][r])
    return x, max(pivots) / min(pivots)
