"""Derivative-free one-dimensional search helpers.

Golden-section only: every optimum this package chases is unimodal on a
known bracket, so the fixed-ratio shrink is enough and keeps evaluation
counts predictable.
"""

import math

R_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Minimize a unimodal f on [lo, hi]; returns the abscissa.

    tol is the absolute bracket width at which the search stops.
    """
    if not lo < hi:
        raise ValueError("golden_min needs lo < hi")
    a, b = lo, hi
    c = b - R_GOLDEN * (b - a)
    d = a + R_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - R_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + R_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def golden_max(f, lo: float, hi: float, tol: float) -> float:
    """Maximize a unimodal f on [lo, hi]; returns the abscissa."""
    return golden_min(lambda x: -f(x), lo, hi, tol)
