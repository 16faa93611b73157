"""Moment-envelope tail calculus.

A moment envelope psi assigns each order p an upper bound on |xi|_p; the
ratio sup_p |xi|_p / psi(p) is the envelope norm.  For a variable with
envelope norm at most one, Markov's inequality at every admissible p gives

    P(|xi| >= y) <= inf_p exp(-(p ln y - p ln psi(p)))
                  = exp(-conjugate(ln y)),    y >= e,

where conjugate is the Young-Fenchel transform of p -> p ln psi(p).  This
module houses the envelope families, the norm, the numerical transform,
the tail curves, and the closed-form parameter combination rules for
products of envelopes.

Validity convention: every evaluation point of the transform yields a
true Markov bound, so a sup over any subset of orders is conservative but
never wrong.  Tabulated envelopes are therefore conjugated on their own
grid points only; interpolating between measured bounds could understate
the envelope and overstate the decay.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySupportError, OutOfSupportError
from .optimize import golden_max

P_MAX_DEFAULT = 200.0
NORM_GRID_POINTS = 64
CONJUGATE_GRID_POINTS = 512
SUPPORT_EDGE_SHRINK = 1e-9
DIVERGENCE_MARGIN = 1e-9


class PsiSpec:
    """Moment envelope interface: a positive function of the order p."""

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def log_value(self, p: float) -> float:
        raise NotImplementedError

    def value(self, p: float) -> float:
        return math.exp(self.log_value(p))

    def asymptotic_log(self) -> float:
        """Limit of ln psi(p) as p grows; inf when the envelope is unbounded.

        Finite only for envelopes that certify a bounded variable; the
        tail transform diverges exactly when ln y exceeds this limit.
        """
        return math.inf

    def _check(self, p: float) -> None:
        lo, hi = self.support
        if not (lo <= p <= hi):
            raise OutOfSupportError(
                f"order p={p} outside the envelope support [{lo}, {hi}]"
            )


@dataclass(frozen=True)
class PowerLogPsi(PsiSpec):
    """psi(p) = p^(1/m) * (ln p)^(-r); the sub-Weibull family.

    r = 0 covers the pure power scale (m=2 is the gaussian-like case,
    m=1 the exponential-like one).
    """

    m: float
    r: float = 0.0

    def __post_init__(self):
        if self.m <= 0.0:
            raise DomainError(f"need m > 0, got {self.m}")

    @property
    def support(self) -> tuple[float, float]:
        # r != 0 needs ln p bounded away from 0 to keep inf psi > 0
        return (2.0 if self.r != 0.0 else 1.0, math.inf)

    def log_value(self, p: float) -> float:
        self._check(p)
        return math.log(p) / self.m - self.r * math.log(math.log(p))


@dataclass(frozen=True)
class ExpPowerPsi(PsiSpec):
    """psi(p) = exp(c * p^beta); envelopes with only logarithmic tails."""

    c: float
    beta: float

    def __post_init__(self):
        if self.c <= 0.0 or self.beta <= 0.0:
            raise DomainError("need c > 0 and beta > 0")

    @property
    def support(self) -> tuple[float, float]:
        return (1.0, math.inf)

    def log_value(self, p: float) -> float:
        self._check(p)
        return self.c * p ** self.beta


@dataclass(frozen=True)
class FiniteBPsi(PsiSpec):
    """psi(p) = c1 * (b - p)^(-(theta+1)/b) on (1, b): a hard moment ceiling.

    Moments blow up approaching the critical order b; the induced tail is
    polynomial of order b with a logarithmic correction.
    """

    b: float
    theta: float
    c1: float = 1.0

    def __post_init__(self):
        if self.b <= 2.0:
            raise DomainError(f"need critical order b > 2, got {self.b}")
        if self.c1 <= 0.0:
            raise DomainError(f"need c1 > 0, got {self.c1}")

    @property
    def support(self) -> tuple[float, float]:
        return (1.0, self.b * (1.0 - SUPPORT_EDGE_SHRINK))

    def log_value(self, p: float) -> float:
        self._check(p)
        return math.log(self.c1) - (self.theta + 1.0) / self.b * math.log(self.b - p)


@dataclass(frozen=True)
class ConstantPsi(PsiSpec):
    """psi(p) = c: the envelope of a variable bounded by c."""

    c: float

    def __post_init__(self):
        if self.c <= 0.0:
            raise DomainError(f"need c > 0, got {self.c}")

    @property
    def support(self) -> tuple[float, float]:
        return (1.0, math.inf)

    def log_value(self, p: float) -> float:
        self._check(p)
        return math.log(self.c)

    def value(self, p: float) -> float:
        self._check(p)
        return self.c

    def asymptotic_log(self) -> float:
        return math.log(self.c)


@dataclass(frozen=True, eq=False)
class TabulatedPsi(PsiSpec):
    """Envelope given by values on a finite order grid.

    Between grid points ln psi is interpolated linearly in ln p (for
    evaluation and norms); the tail transform never interpolates, see the
    module docstring.
    """

    p_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        p.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "p_grid", p)
        object.__setattr__(self, "values", v)
        if p.ndim != 1 or p.size < 1 or v.shape != p.shape:
            raise DomainError("need matching one-dimensional order and value grids")
        if not np.all(np.diff(p) > 0.0):
            raise DomainError("order grid must be strictly increasing")
        if p[0] <= 1.0:
            raise DomainError("orders must exceed 1")
        if not np.all(np.isfinite(v)) or float(v.min()) <= 0.0:
            raise DomainError("envelope values must be finite and > 0")

    @property
    def support(self) -> tuple[float, float]:
        return (float(self.p_grid[0]), float(self.p_grid[-1]))

    def log_value(self, p: float) -> float:
        self._check(p)
        return float(
            np.interp(math.log(p), np.log(self.p_grid), np.log(self.values))
        )


@dataclass(frozen=True, eq=False)
class ProductPsi(PsiSpec):
    """Pointwise product of envelopes on the intersected support."""

    parts: tuple[PsiSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise DomainError("product needs at least one envelope")
        lo, hi = self.support
        if lo >= hi:
            raise EmptySupportError(
                f"envelope supports do not overlap: [{lo}, {hi}]"
            )

    @property
    def support(self) -> tuple[float, float]:
        lo = max(s.support[0] for s in self.parts)
        hi = min(s.support[1] for s in self.parts)
        return (lo, hi)

    def log_value(self, p: float) -> float:
        self._check(p)
        return sum(s.log_value(p) for s in self.parts)

    def asymptotic_log(self) -> float:
        return sum(s.asymptotic_log() for s in self.parts)


def combine_product(specs) -> ProductPsi:
    """Product envelope; rejects non-overlapping supports."""
    return ProductPsi(parts=tuple(specs))


def order_grid(spec: PsiSpec, p_max: float = P_MAX_DEFAULT, n: int = NORM_GRID_POINTS) -> np.ndarray:
    """Evaluation orders for a spec: its own grid when tabulated, else
    log-spaced points on [2, min(support end, p_max)]."""
    if isinstance(spec, TabulatedPsi):
        g = spec.p_grid[(spec.p_grid >= 2.0) & (spec.p_grid <= p_max)]
        if g.size == 0:
            raise OutOfSupportError("no tabulated orders inside [2, p_max]")
        return g
    lo, hi = spec.support
    lo = max(lo, 2.0)
    hi = min(hi, p_max)
    if lo >= hi:
        raise OutOfSupportError(f"empty order grid: [{lo}, {hi}]")
    # exp(log ...) can overshoot the support edge by an ulp
    return np.clip(np.exp(np.linspace(math.log(lo), math.log(hi), n)), lo, hi)


def gls_norm(
    moment_fn,
    spec: PsiSpec,
    p_max: float = P_MAX_DEFAULT,
    n_grid: int = NORM_GRID_POINTS,
) -> float:
    """sup over the order grid of |xi|_p / psi(p).

    moment_fn maps p to the p-th moment root.  A grid sup underestimates
    the true supremum, which is the conservative direction here: the norm
    feeds tail bounds as an assumed scale, and scaling by less never
    manufactures decay that is not there.
    """
    grid = order_grid(spec, p_max=p_max, n=n_grid)
    best = 0.0
    for p in grid:
        p = float(p)
        best = max(best, float(moment_fn(p)) / spec.value(p))
    return best


def moment_log_growth(spec: PsiSpec):
    """The function p -> p * ln psi(p) = ln(psi(p)^p), ready to conjugate."""
    return lambda p: p * spec.log_value(p)


def young_fenchel(
    p_grid,
    growth_values,
    u: float,
    growth_fn=None,
    slope_limit: float = math.inf,
) -> float:
    """sup_p (p*u - growth(p)) over the grid, the convex conjugate at u.

    growth_fn, when given, enables a golden-section polish around the
    grid argmax; without it the sup stays on the grid points (the valid
    choice for measured envelopes).  slope_limit is the exact limit of
    growth(p)/p: the conjugate is infinite iff u exceeds it.
    """
    if u > slope_limit + DIVERGENCE_MARGIN:
        return math.inf
    p_grid = np.asarray(p_grid, dtype=float)
    growth_values = np.asarray(growth_values, dtype=float)
    if p_grid.size == 0:
        raise DomainError("conjugate needs a nonempty order grid")
    vals = p_grid * u - growth_values
    k = int(np.argmax(vals))
    best = float(vals[k])
    if growth_fn is not None and p_grid.size > 1:
        lo = float(p_grid[max(k - 1, 0)])
        hi = float(p_grid[min(k + 1, p_grid.size - 1)])
        if hi > lo:
            p_star = golden_max(lambda p: p * u - growth_fn(p), lo, hi, 1e-10)
            best = max(best, p_star * u - growth_fn(p_star))
    return best


def conjugate_exponent(spec: PsiSpec, u: float, p_max: float = P_MAX_DEFAULT) -> float:
    """Young-Fenchel transform of the spec's moment growth, at u.

    Diverges to +inf exactly when u clears the envelope's asymptotic
    level (a certified bounded variable above its bound).
    """
    lo_hi = spec.support
    slope = spec.asymptotic_log() if math.isinf(lo_hi[1]) else math.inf
    grid = order_grid(spec, p_max=p_max, n=CONJUGATE_GRID_POINTS)
    growth = moment_log_growth(spec)
    vals = np.array([growth(float(p)) for p in grid])
    fn = None if isinstance(spec, TabulatedPsi) else growth
    return young_fenchel(grid, vals, u, growth_fn=fn, slope_limit=slope)


@dataclass(frozen=True, eq=False)
class TailCurve:
    """Upper bound on P(|xi| >= y) along an ascending y grid."""

    y: np.ndarray
    bound: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        b = np.asarray(self.bound, dtype=float)
        y.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "bound", b)
        if y.ndim != 1 or y.size < 1 or b.shape != y.shape:
            raise DomainError("need matching one-dimensional y and bound grids")
        if not np.all(np.diff(y) > 0.0):
            raise DomainError("y grid must be strictly increasing")
        if float(y[0]) < math.e - 1e-12:
            raise DomainError("tail bounds start at y = e")
        if float(b.min()) < 0.0 or float(b.max()) > 1.0 + 1e-15:
            raise DomainError("tail bound values must lie in [0, 1]")
        if np.any(np.diff(b) > 1e-15):
            raise DomainError("tail bound must be nonincreasing")


def tail_upper(spec: PsiSpec, y_grid, assumed_norm: float = 1.0) -> TailCurve:
    """exp(-conjugate(ln(y / norm))) clamped to [0, 1], forced monotone.

    assumed_norm rescales the envelope (norm * psi certifies the
    variable), which shifts the conjugate argument by -ln(norm).
    """
    if assumed_norm <= 0.0:
        raise DomainError(f"need assumed_norm > 0, got {assumed_norm}")
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or y.size < 1:
        raise DomainError("need a one-dimensional y grid")
    shift = math.log(assumed_norm)
    out = np.empty_like(y)
    for i, yi in enumerate(y):
        e = conjugate_exponent(spec, math.log(float(yi)) - shift)
        out[i] = 0.0 if math.isinf(e) else math.exp(-min(max(e, 0.0), 745.0))
    out = np.minimum.accumulate(np.clip(out, 0.0, 1.0))
    return TailCurve(y=y, bound=out)


def combine_power_log(params) -> tuple[float, float]:
    """Exponent arithmetic for a product of sub-Weibull envelopes.

    Each factor contributes (m_k, gamma_k); the product's tail shape is
    exp(-c u^(m0) (ln u)^(-gamma0)) with 1/m0 = sum of 1/m_k and gamma0 =
    sum of gamma_k.  Heavier factors (small m) dominate the combination.
    """
    params = list(params)
    if not params:
        raise DomainError("need at least one (m, gamma) pair")
    inv = 0.0
    gamma0 = 0.0
    for m, gamma in params:
        if m <= 0.0:
            raise DomainError(f"need m > 0, got {m}")
        inv += 1.0 / m
        gamma0 += gamma
    return 1.0 / inv, gamma0


def combine_finite_b(params) -> tuple[float, float]:
    """Critical-order arithmetic for a product of hard-ceiling envelopes.

    The smallest critical order b0 governs; each factor attaining it
    contributes (theta_k + 1)/b0 to the blow-up exponent.  The combined
    moment envelope is c (b0 - p)^(-Theta) on [2, b0) with tail
    c' y^(-b0) (ln y)^(b0 Theta).
    """
    params = list(params)
    if not params:
        raise DomainError("need at least one (b, theta) pair")
    for b, _ in params:
        if b <= 2.0:
            raise DomainError(f"need every critical order > 2, got {b}")
    b0 = min(b for b, _ in params)
    big = sum((theta + 1.0) / b0 for b, theta in params if b <= b0 * (1.0 + 1e-12))
    return b0, big
