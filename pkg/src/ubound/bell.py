"""Poisson moment function and its closed-form envelopes.

The p-th raw moment of a Poisson(beta) variable,

    B(p, beta) = exp(-beta) * sum_{k>=0} k^p beta^k / k!,

is a two-parameter extension of the Bell numbers: at beta = 1 and integer p
it returns 1, 2, 5, 15, 52, ...  It is the exact growth constant of the
moment bounds in this package, so it has to be evaluated reliably for real
p up to a few hundred.  All series work happens in the log domain because
k^p beta^k / k! overflows double precision long before the sum converges.

Alongside the series the module evaluates the explicit envelopes used by
the bound and report pipelines:

* ``upper_envelope``       variational upper bound on B^(1/p),
* ``discrete_lower_envelope``   the largest single series term,
* ``stirling_lower_envelope``   its continuous relaxation via a factorial
  bound (diagnostic only; see the function docstring),
* ``asymptotic_upper``     a simplified bound for p well above beta.

Results are plain floats; logarithmic quantities use -inf to encode zero.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BracketFailureError, DomainError, NonConvergentError
from .optimize import golden_max, golden_min

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@lru_cache(maxsize=None)
def _log_factorial(k: int) -> float:
    # lgamma is accurate to ~1 ulp; the cache keeps grid sweeps cheap and
    # gives the table single-initialization semantics under threads.
    return math.lgamma(k + 1.0)


@dataclass(frozen=True)
class BellEvalConfig:
    """Series evaluation knobs.

    rel_tol bounds the relative truncation error of the series; max_terms
    caps the number of terms before the evaluation is declared
    non-convergent.
    """

    rel_tol: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_EVAL = BellEvalConfig()


def _check_p_beta(p: float, beta: float) -> None:
    if not (p >= 0.0 and math.isfinite(p)):
        raise DomainError(f"p must be finite and >= 0, got {p}")
    if not (beta > 0.0 and math.isfinite(beta)):
        raise DomainError(f"beta must be finite and > 0, got {beta}")


def log_bell(p: float, beta: float, cfg: BellEvalConfig = DEFAULT_EVAL) -> float:
    """Return ln B(p, beta) by direct log-domain summation.

    The running sum is kept as (max exponent, rescaled mantissa sum), a
    streaming log-sum-exp.  Truncation: once the consecutive term ratio

        r_k = t_{k+1} / t_k = (1 + 1/k)^p * beta / (k + 1)

    has fallen below 1/2 it keeps falling, so the remaining tail is below
    the geometric envelope t_k * r_k / (1 - r_k); the loop stops when that
    envelope is below rel_tol times the partial sum.
    """
    _check_p_beta(p, beta)
    if p == 0.0:
        return 0.0  # the pmf sums to one
    log_beta = math.log(beta)
    log_rel_tol = math.log(cfg.rel_tol)
    m = -math.inf  # largest log-term seen
    s = 0.0        # sum of exp(log-term - m)
    for k in range(1, cfg.max_terms + 1):
        lt = p * math.log(k) + k * log_beta - _log_factorial(k) - beta
        if lt <= m:
            s += math.exp(lt - m)
        else:
            s = s * math.exp(m - lt) + 1.0
            m = lt
        log_r = p * math.log1p(1.0 / k) + log_beta - math.log(k + 1.0)
        if log_r < -math.log(2.0):
            r = math.exp(log_r)
            log_sum = m + math.log(s)
            if lt + math.log(r / (1.0 - r)) < log_sum + log_rel_tol:
                return log_sum
    raise NonConvergentError(
        f"series for B({p}, {beta}) did not settle within {cfg.max_terms} terms"
    )


def bell_value(p: float, beta: float, cfg: BellEvalConfig = DEFAULT_EVAL) -> float:
    """B(p, beta) itself; overflows to inf when the log exceeds ~709."""
    return math.exp(log_bell(p, beta, cfg))


def bell_root(p: float, beta: float, cfg: BellEvalConfig = DEFAULT_EVAL) -> float:
    """B(p, beta)^(1/p), the moment root; requires p >= 1."""
    if p < 1.0:
        raise DomainError(f"bell_root needs p >= 1, got {p}")
    return math.exp(log_bell(p, beta, cfg) / p)


def stirling_factorial_bound(k: float) -> float:
    """Upper bound sqrt(2 pi k) (k/e)^k e^(1/(12k)) >= k! for k >= 1.

    Evaluated in the log domain so the k > 20 range does not lose accuracy
    to naive powering; the returned value still overflows near k = 171.
    """
    if k < 1.0:
        raise DomainError(f"factorial bound needs k >= 1, got {k}")
    lz = 0.5 * math.log(2.0 * math.pi * k) + k * (math.log(k) - 1.0) + 1.0 / (12.0 * k)
    return math.exp(lz)


def upper_envelope(p: float, beta: float) -> float:
    """Variational upper bound on bell_root(p, beta), valid for all p, beta > 0.

    Equals (p/e) * inf_{lam > 0} lam^-1 [exp(beta (e^lam - 1))]^(1/p), the
    Chernoff-style optimization of x^p <= (p/(e lam))^p e^(lam x) against
    the Poisson moment generating function.  (The source display folds the
    lam^-1 inside the 1/p bracket; that version fails to dominate the
    moment root once beta exceeds p, so the properly derived form is used.)
    The bracket objective phi(lam) = -ln lam + beta (e^lam - 1)/p is
    strictly convex with phi' < 0 near zero; the default bracket is
    [1e-8, ln(2 + p/beta)], widened once before giving up.
    """
    _check_p_beta(p, beta)
    if p <= 0.0:
        raise DomainError(f"upper_envelope needs p > 0, got {p}")

    def phi(lam: float) -> float:
        return -math.log(lam) + beta * math.expm1(lam) / p

    def dphi(lam: float) -> float:
        return -1.0 / lam + (beta / p) * math.exp(lam)

    lo = 1e-8
    hi = math.log(2.0 + p / beta)
    if dphi(hi) <= 0.0:
        hi = 4.0 * hi + 5.0  # single widening attempt
        if dphi(hi) <= 0.0:
            raise BracketFailureError(
                f"no minimizing bracket for upper_envelope({p}, {beta})"
            )
    lam = golden_min(phi, lo, hi, tol=1e-10)
    return (p / math.e) * math.exp(phi(lam))


def discrete_lower_envelope(
    p: float, beta: float, cfg: BellEvalConfig = DEFAULT_EVAL
) -> float:
    """Largest single series term sup_k e^-beta k^p beta^k / k!.

    A lower bound on B(p, beta) since every term is nonnegative.
    """
    _check_p_beta(p, beta)
    if p == 0.0:
        # terms decay monotonically from k = 0
        return math.exp(-beta)
    log_beta = math.log(beta)
    log_rel_tol = math.log(cfg.rel_tol)
    best = -math.inf
    for k in range(1, cfg.max_terms + 1):
        lt = p * math.log(k) + k * log_beta - _log_factorial(k) - beta
        if lt > best:
            best = lt
        log_r = p * math.log1p(1.0 / k) + log_beta - math.log(k + 1.0)
        # once the ratio is below one it stays below one, so a term this far
        # under the running maximum can never be overtaken
        if log_r < 0.0 and lt < best + log_rel_tol:
            break
    return math.exp(best)


def stirling_lower_envelope(p: float, beta: float) -> float:
    """Continuous relaxation of the largest-term envelope.

    Evaluates sup over real x in (1, x_max) of

        e^(1/(6 p x)) * [ e^(x - beta) x^(p - x - 1/2) / (sqrt(2 pi) x^x) ]^(1/p)

    by a 200-point geometric multistart grid plus golden-section polish
    around the three best starts.  The expression is kept exactly as the
    source bound states it; its derivation through the factorial bound is
    not self-consistent (the x^x denominator double-counts the Stirling
    core), so the value is reported as a diagnostic and never asserted
    against bell_root.  See the sandwich report, which records rather than
    enforces this side of the bracket.
    """
    _check_p_beta(p, beta)
    if p <= 0.0:
        raise DomainError(f"stirling_lower_envelope needs p > 0, got {p}")

    def log_f(x: float) -> float:
        return 1.0 / (6.0 * p * x) + (
            (x - beta)
            + (p - x - 0.5) * math.log(x)
            - _LOG_SQRT_2PI
            - x * math.log(x)
        ) / p

    x_max = max(10.0 * p, 10.0 * beta, 100.0)
    grid = np.exp(np.linspace(math.log(1.0 + 1e-9), math.log(x_max), 200))
    vals = np.array([log_f(x) for x in grid])
    best = -math.inf
    for i in np.argsort(vals)[-3:]:
        lo = grid[max(int(i) - 1, 0)]
        hi = grid[min(int(i) + 1, len(grid) - 1)]
        if lo < hi:
            x = golden_max(log_f, lo, hi, tol=1e-9)
        else:
            x = grid[int(i)]
        best = max(best, log_f(x))
    return math.exp(best)


def asymptotic_upper(p: float, beta: float) -> float:
    """Simplified upper bound on bell_root for p >= 2 beta with p/beta > e.

    Equals (p/e) / (ln(p/beta) - ln ln(p/beta)) * exp(1/ln(p/beta) - beta/p).
    """
    _check_p_beta(p, beta)
    if p < 1.0:
        raise DomainError(f"asymptotic_upper needs p >= 1, got {p}")
    t = p / beta
    if p < 2.0 * beta or t <= math.e:
        raise DomainError(
            f"asymptotic_upper needs p >= 2 beta and p/beta > e, got p={p}, beta={beta}"
        )
    log_t = math.log(t)
    return (p / math.e) / (log_t - math.log(log_t)) * math.exp(1.0 / log_t - 1.0 / t)


@dataclass(frozen=True)
class BellSandwich:
    """One evaluation point of the envelope sandwich around bell_root.

    asym_upper is None where its domain condition fails; root_over_beta is
    populated on the complementary regime p <= 2 beta, where the root is
    expected to track beta to within a modest constant.
    """

    p: float
    beta: float
    b_root: float
    g_upper: float
    h0_lower: float
    h_lower: float
    asym_upper: float | None
    root_over_beta: float | None


def sandwich(p: float, beta: float, cfg: BellEvalConfig = DEFAULT_EVAL) -> BellSandwich:
    """Evaluate bell_root and every envelope applicable at (p, beta)."""
    if p < 1.0:
        raise DomainError(f"sandwich needs p >= 1, got {p}")
    root = bell_root(p, beta, cfg)
    asym = None
    if p >= 2.0 * beta and p / beta > math.e:
        asym = asymptotic_upper(p, beta)
    ratio = root / beta if p <= 2.0 * beta else None
    return BellSandwich(
        p=p,
        beta=beta,
        b_root=root,
        g_upper=upper_envelope(p, beta),
        h0_lower=discrete_lower_envelope(p, beta, cfg),
        h_lower=stirling_lower_envelope(p, beta),
        asym_upper=asym,
        root_over_beta=ratio,
    )


def sandwich_report(
    p_grid, beta_grid, cfg: BellEvalConfig = DEFAULT_EVAL
) -> list[BellSandwich]:
    """Sandwich evaluations over the product of the two grids, row-major."""
    return [sandwich(p, beta, cfg) for p in p_grid for beta in beta_grid]
