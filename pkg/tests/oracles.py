"""Independent reference implementations used to freeze expected values.

Everything here is deliberately written against different algorithms than
the package: exact integer recurrences, high-precision direct summation,
dense grid scans, and brute-force enumeration.  Slow is fine; agreeing
with the package by construction is not.
"""

import itertools
import math

import mpmath
import numpy as np


def bell_number(n: int) -> int:
    """n-th Bell number via the Bell triangle, exact integer arithmetic."""
    if n < 0:
        raise ValueError("n must be >= 0")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def poisson_moment_mp(p, beta, dps: int = 60, kmax: int = 3000) -> mpmath.mpf:
    """B(p, beta) by direct summation at dps decimal digits."""
    with mpmath.workdps(dps):
        beta = mpmath.mpf(beta)
        p = mpmath.mpf(p)
        total = mpmath.mpf(0)
        term_log_peak = -mpmath.inf
        for k in range(1, kmax + 1):
            t = mpmath.e ** (-beta) * mpmath.mpf(k) ** p * beta**k / mpmath.factorial(k)
            total += t
            lt = mpmath.log(t)
            term_log_peak = max(term_log_peak, lt)
            if lt < term_log_peak - 200:
                break
        return total


def upper_envelope_grid(p, beta, step: float = 1e-6) -> float:
    """(p/e) * min over a dense lambda grid of lam^-1 [exp(beta(e^lam - 1))]^(1/p)."""
    hi = math.log(2.0 + p / beta)
    lams = np.arange(step, hi + step, step)
    phi = -np.log(lams) + beta * np.expm1(lams) / p
    return (p / math.e) * math.exp(float(phi.min()))


def discrete_lower_envelope_enum(p, beta, kmax: int = 2000) -> float:
    """max over k = 1..kmax of e^-beta k^p beta^k / k!, log domain."""
    ks = np.arange(1, kmax + 1, dtype=float)
    lt = p * np.log(ks) + ks * math.log(beta) - [math.lgamma(k + 1) for k in ks] - beta
    return math.exp(float(np.max(lt)))


def stirling_lower_envelope_grid(p, beta, n_pts: int = 2_000_000) -> float:
    """Dense geometric grid scan of the continuous largest-term relaxation.

    Uses the same printed expression as the package (including the x^x
    denominator) so the frozen values pin the implementation, not a
    re-derivation.
    """
    x_max = max(10.0 * p, 10.0 * beta, 100.0)
    xs = np.exp(np.linspace(math.log(1.0 + 1e-9), math.log(x_max), n_pts))
    log_f = 1.0 / (6.0 * p * xs) + (
        (xs - beta)
        + (p - xs - 0.5) * np.log(xs)
        - 0.5 * math.log(2.0 * math.pi)
        - xs * np.log(xs)
    ) / p
    return math.exp(float(np.max(log_f)))


def enumerate_sum_moment(atoms, probs, p) -> float:
    """Exact E (eta_1 + ... + eta_n)^p for independent finite variables.

    atoms[j] and probs[j] describe variable j.  Plain nested enumeration
    over the product sample space.
    """
    total = 0.0
    for combo in itertools.product(*[range(len(a)) for a in atoms]):
        prob = 1.0
        s = 0.0
        for j, idx in enumerate(combo):
            prob *= probs[j][idx]
            s += atoms[j][idx]
        total += prob * s**p
    return total


def enumerate_grid_sum_moment(values, axis_probs, points, p) -> float:
    """Exact E S_L^p for a d=2 grid kernel by brute-force enumeration.

    values: 2-d table; axis_probs: per-axis probability vectors over grid
    indices; points: 1-based (i, j) pairs; the index variables run over
    1..max coordinate per axis.
    """
    n1 = max(i for i, _ in points)
    n2 = max(j for _, j in points)
    k1 = len(axis_probs[0])
    k2 = len(axis_probs[1])
    total = 0.0
    for combo1 in itertools.product(range(k1), repeat=n1):
        pr1 = 1.0
        for c in combo1:
            pr1 *= axis_probs[0][c]
        for combo2 in itertools.product(range(k2), repeat=n2):
            pr2 = 1.0
            for c in combo2:
                pr2 *= axis_probs[1][c]
            s = 0.0
            for i, j in points:
                s += values[combo1[i - 1]][combo2[j - 1]]
            s /= len(points)
            total += pr1 * pr2 * s**p
    return total


def best_rank1_weighted_l2(values, w_row, w_col, n_angle: int = 720) -> float:
    """Smallest weighted-L2 error of a nonnegative rank-1 approximation.

    Exhaustive scan over factor directions on the nonnegative quarter
    sphere (angle grid, refined once), with the closed-form optimal
    nonnegative scale for each direction pair.  Only 2x2 tables are
    needed, where a single angle parametrizes each factor.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (2, 2):
        raise ValueError("oracle only handles 2x2 tables")
    w = np.outer(w_row, w_col)

    def best_on(thetas, phis):
        # (T, P) tables of the error for every direction pair, with the
        # closed-form optimal nonnegative scale applied pointwise
        u = np.stack([np.cos(thetas), np.sin(thetas)])  # (2, T)
        v = np.stack([np.cos(phis), np.sin(phis)])  # (2, P)
        # outer[i, j, t, p] = u[i, t] * v[j, p]
        outer = u[:, None, :, None] * v[None, :, None, :]
        denom = np.einsum("ij,ijtp->tp", w, outer * outer)
        num = np.einsum("ij,ijtp->tp", w * values, outer)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(denom > 0.0, np.clip(num / denom, 0.0, None), 0.0)
        diff = values[:, :, None, None] - c[None, None, :, :] * outer
        err = np.sqrt(np.einsum("ij,ijtp->tp", w, diff * diff))
        k = np.unravel_index(int(np.argmin(err)), err.shape)
        return float(err[k]), float(thetas[k[0]]), float(phis[k[1]])

    grid = np.linspace(0.0, math.pi / 2.0, n_angle)
    best, th0, ph0 = best_on(grid, grid)
    # one refinement pass around the best coarse cell
    span = math.pi / 2.0 / (n_angle - 1)
    fine_th = np.clip(th0 + np.linspace(-span, span, 41), 0.0, math.pi / 2.0)
    fine_ph = np.clip(ph0 + np.linspace(-span, span, 41), 0.0, math.pi / 2.0)
    refined, _, _ = best_on(fine_th, fine_ph)
    return min(best, refined)
