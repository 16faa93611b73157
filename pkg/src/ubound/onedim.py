"""Moment bounds for sums and averages of independent nonnegative variables.

Three routes are provided for |n^-1 sum eta_j|_p with eta_j >= 0
independent and p >= 2:

* the triangle route: the plain norm sum, sharp for strongly dependent-like
  heavy single terms,
* the Poisson-moment route: a Rosenthal-type bound whose constant is the
  Poisson moment function at beta = 1, sharp for many small summands,
* their pointwise minimum, which is the bound the rest of the package uses.

The module also evaluates the exact supremum of E (sum eta_j)^p over the
class of all finite independent families with prescribed total first and
p-th moments, which calibrates how loose the closed-form routes can be.
"""

import math
import warnings
from dataclasses import dataclass

from . import bell
from .errors import DomainError, InfeasibleClassWarning

LYAPUNOV_SLACK = 1e-12


@dataclass(frozen=True)
class MomentTable:
    """Per-variable first and p-th moments of nonnegative variables.

    m1[j] = E eta_j, mp[j] = E eta_j^p for one fixed p >= 2.  Tables are
    validated on construction: a variable with E eta > (E eta^p)^(1/p)
    beyond a small slack violates the Lyapunov ordering and cannot exist.
    """

    p: float
    m1: tuple[float, ...]
    mp: tuple[float, ...]

    def __post_init__(self):
        if self.p < 2.0:
            raise DomainError(f"MomentTable needs p >= 2, got {self.p}")
        if len(self.m1) != len(self.mp):
            raise DomainError("m1 and mp must have equal length")
        if len(self.m1) == 0:
            raise DomainError("MomentTable must not be empty")
        for j, (a, b) in enumerate(zip(self.m1, self.mp)):
            if a < 0.0 or b < 0.0:
                raise DomainError(f"moments must be >= 0, entry {j} is ({a}, {b})")
            if a > b ** (1.0 / self.p) + LYAPUNOV_SLACK:
                raise DomainError(
                    f"entry {j} violates Lyapunov ordering: m1={a} > mp^(1/p)={b ** (1.0 / self.p)}"
                )

    @property
    def n(self) -> int:
        return len(self.m1)


def iid_table(m1: float, mp: float, p: float, n: int) -> MomentTable:
    """Moment table for n independent copies of one variable."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    return MomentTable(p=p, m1=(m1,) * n, mp=(mp,) * n)


def triangle_bound(table: MomentTable) -> float:
    """sum_j |eta_j|_p, an unconditional bound on |sum eta_j|_p."""
    p = table.p
    return sum(m ** (1.0 / p) for m in table.mp)


def rosenthal_bound(
    table: MomentTable, cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL
) -> float:
    """Rosenthal-type bound B(p, 1) * max(sum mp, (sum m1)^p) on E (sum eta_j)^p.

    Sharp in order: for Bernoulli(1/n) summands the ratio to the exact
    moment tends to one as n grows.  Scale-covariant: scaling every eta_j
    by c multiplies the bound by c^p.
    """
    s1 = sum(table.m1)
    sp = sum(table.mp)
    return bell.bell_value(table.p, 1.0, cfg) * max(sp, s1**table.p)


@dataclass(frozen=True)
class MeanBoundBreakdown:
    """Both routes for |n^-1 sum eta_j|_p and their minimum.

    z is the triangle route divided by n; v is the Poisson-moment route
    B(p,1)^(1/p)/n * max((sum mp)^(1/p), sum m1); theta = min(z, v).
    """

    z: float
    v: float
    theta: float


def theta_bound(
    table: MomentTable, cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL
) -> MeanBoundBreakdown:
    """Best available closed-form bound on the normalized sum's p-norm."""
    p = table.p
    n = table.n
    z = triangle_bound(table) / n
    v = (
        bell.bell_root(p, 1.0, cfg)
        / n
        * max(sum(table.mp) ** (1.0 / p), sum(table.m1))
    )
    return MeanBoundBreakdown(z=z, v=v, theta=min(z, v))


def theta_bound_iid(
    m1: float, mp: float, p: float, n: int, cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL
) -> MeanBoundBreakdown:
    """theta_bound for n iid copies without materializing the table.

    z collapses to mp^(1/p); v to B(p,1)^(1/p) max(n^(1/p-1) mp^(1/p), m1).
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if p < 2.0:
        raise DomainError(f"need p >= 2, got {p}")
    if m1 < 0.0 or mp < 0.0:
        raise DomainError("moments must be >= 0")
    if m1 > mp ** (1.0 / p) + LYAPUNOV_SLACK:
        raise DomainError("m1 > mp^(1/p) violates Lyapunov ordering")
    z = mp ** (1.0 / p)
    v = bell.bell_root(p, 1.0, cfg) * max(n ** (1.0 / p - 1.0) * mp ** (1.0 / p), m1)
    return MeanBoundBreakdown(z=z, v=v, theta=min(z, v))


def best_mean_bound(
    tables, cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL
) -> float:
    """Largest theta over a family of tables: bounds sup over the family."""
    tables = list(tables)
    if not tables:
        raise DomainError("best_mean_bound needs at least one table")
    return max(theta_bound(t, cfg).theta for t in tables)


def extremal_class_supremum(
    a: float, b: float, p: float, cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL
) -> float:
    """Exact sup of E (sum eta_j)^p over independent nonnegative families
    with sum E eta_j = a and sum E eta_j^p = b (any family size).

    Equals (b/a)^(p/(p-1)) * B(p, mu) with mu = a^(p/(p-1)) b^(1/(1-p)).
    Emits InfeasibleClassWarning when b < a^p, which no single variable can
    satisfy (larger families still can; the supremum formula stays valid).
    """
    if p <= 1.0:
        raise DomainError(f"extremal_class_supremum needs p > 1, got {p}")
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"moment budgets must be > 0, got a={a}, b={b}")
    if b < a**p:
        warnings.warn(
            f"no single variable has E eta = {a} and E eta^p = {b} (b < a^p)",
            InfeasibleClassWarning,
            stacklevel=2,
        )
    q = p / (p - 1.0)
    mu = a**q * b ** (1.0 / (1.0 - p))
    return (b / a) ** q * bell.bell_value(p, mu, cfg)
