import random
from fractions import Fraction

import mpmath as mp
import pytest

from legtau import set_precision
from legtau.polybasis import MonoVec


@pytest.fixture(autouse=True)
def default_precision():
    set_precision(40)
    yield


@pytest.fixture
def rng():
    return random.Random(90125)


def random_rational_poly(rng, max_degree, max_num=9, max_den=9):
    deg = rng.randint(0, max_degree)
    coeffs = [Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
              for _ in range(deg + 1)]
    if all(c == 0 for c in coeffs):
        coeffs[-1] = Fraction(1)
    return MonoVec(tuple(coeffs))


def convolution_power(coeffs, q, width=None):
    """Brute-force polynomial power by repeated convolution."""
    out = [1]
    for _ in range(q):
        nxt = [0] * (len(out) + len(coeffs) - 1)
        for i, a in enumerate(out):
            if a == 0:
                continue
            for j, b in enumerate(coeffs):
                if b != 0:
                    nxt[i + j] += a * b
        out = nxt
    if width is not None:
        out = (out + [0] * width)[:width]
    return tuple(out)


def symbolic_derivative(p: MonoVec, times=1) -> MonoVec:
    for _ in range(times):
        p = MonoVec(tuple((i + 1) * p.coeffs[i + 1] for i in range(p.dim - 1)) or (0,))
    return p


def assert_close(a, b, tol):
    from legtau.precision import as_mpf
    gap = abs(as_mpf(a) - as_mpf(b))
    assert gap <= as_mpf(tol), f"|{a} - {b}| = {mp.nstr(gap, 5)} > {mp.nstr(as_mpf(tol), 3)}"
