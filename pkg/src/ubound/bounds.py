"""Moment bounds for normalized sums over multi-index sets.

The object under study is the normalized sum

    S_L = |L|^(-1) * sum over (i_1..i_d) in L of f(X^(1)_{i_1}, .., X^(d)_{i_d})

with independent coordinate samples and a nonnegative kernel f.  Four
bounds on |S_L|_p compete here, cheapest first:

  * trivial: |f|_p, valid for any integrable kernel;
  * factorizable: product of one-dimensional mean bounds, exact-rank-1
    kernels only;
  * weighted theta norm: sum over representation components of
    |lam| * prod of per-coordinate mean bounds, for exactly degenerate
    kernels;
  * composite: inf over degree M of (theta norm of the fitted degree-M
    part) + (residual L_p norm), the general route.

Non-rectangular index sets are handled by circumscribing a box and
paying the cardinality ratio.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import bell
from .errors import DomainError, TooLargeError, UboundNumericError
from .kernels import (
    NEGATIVE_CELL_TOL,
    DegenerateRepresentation,
    GridKernel,
    degree_sweep,
    lp_norm,
    projective_quasi_norm,
)
from .onedim import MomentTable, theta_bound, theta_bound_iid

MAX_BOX_POINTS = 1_000_000
EXACT_RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Finite set of d-tuples of positive integers (the summation set L)."""

    points: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        pts = sorted(set(tuple(int(c) for c in q) for q in self.points))
        if not pts:
            raise DomainError("index set must not be empty")
        d = len(pts[0])
        if d == 0:
            raise DomainError("index tuples must have at least one coordinate")
        for q in pts:
            if len(q) != d:
                raise DomainError("all index tuples must share one length")
            if any(c < 1 for c in q):
                raise DomainError(f"indices are 1-based and positive, got {q}")
        object.__setattr__(self, "points", tuple(pts))

    @classmethod
    def box(cls, sides) -> "IndexSet":
        sides = tuple(int(n) for n in sides)
        if not sides or any(n < 1 for n in sides):
            raise DomainError(f"box sides must be positive, got {sides}")
        total = math.prod(sides)
        if total > MAX_BOX_POINTS:
            raise TooLargeError(
                f"explicit box would hold {total} points (cap {MAX_BOX_POINTS})"
            )
        ranges = [range(1, n + 1) for n in sides]
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, len(sides))
        return cls(points=tuple(map(tuple, grid.tolist())))

    @property
    def d(self) -> int:
        return len(self.points[0])

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def box_sides(self) -> tuple[int, ...]:
        """Side lengths of the minimal circumscribed box.

        Only side lengths matter for i.i.d. coordinate samples, so the box
        is anchored at the per-axis minima rather than at 1.
        """
        arr = np.asarray(self.points)
        return tuple(int(x) for x in (arr.max(axis=0) - arr.min(axis=0) + 1))

    @property
    def box_size(self) -> int:
        return math.prod(self.box_sides)

    @property
    def is_box(self) -> bool:
        return self.size == self.box_size


@dataclass(frozen=True)
class DegreeTerm:
    """One composite term: fitted degree-M theta norm plus fit residual."""

    degree: int
    theta_norm: float
    residual_lp: float

    @property
    def total(self) -> float:
        return self.theta_norm + self.residual_lp


@dataclass(frozen=True)
class BoundBreakdown:
    """Competing bounds on |S_L|_p over a full box, and the winner."""

    p: float
    trivial: float
    factorizable: float | None
    weighted_theta: float | None
    w_composite: float | None
    chosen: float
    provenance: str
    per_degree: tuple[DegreeTerm, ...] = field(default=())

    def __post_init__(self):
        present = [
            v
            for v in (self.trivial, self.factorizable, self.weighted_theta, self.w_composite)
            if v is not None
        ]
        if any(v < 0.0 for v in present):
            raise DomainError("bounds must be >= 0")
        if abs(self.chosen - min(present)) > 1e-12 * max(1.0, abs(self.chosen)):
            raise DomainError("chosen must equal the smallest present bound")


def trivial_bound(kernel: GridKernel, p: float) -> float:
    """|f|_p bounds |S_L|_p for any L: the sum has |L| summands, each with
    the kernel's own law; triangle inequality and the 1/|L| normalization
    do the rest.  No nonnegativity needed."""
    if p < 1.0:
        raise DomainError(f"need p >= 1, got {p}")
    return lp_norm(kernel, p)


def factorizable_bound(tables) -> float:
    """Product of per-coordinate mean bounds for an exact product kernel.

    tables: one MomentTable per coordinate, each carrying the factor's
    per-copy moments under that coordinate's marginal (n(s) = table.n).
    For f = g(x) h(y) the sum factorizes into a product of independent
    normalized one-dimensional sums, so the one-dimensional estimates
    multiply.
    """
    tables = list(tables)
    if not tables:
        raise DomainError("need at least one coordinate table")
    p = tables[0].p
    if any(t.p != p for t in tables):
        raise DomainError("all coordinate tables must share one p")
    out = 1.0
    for t in tables:
        out *= theta_bound(t).theta
    return out


def _factor_theta_matrix(
    rep: DegenerateRepresentation,
    weights,
    p: float,
    ns,
    cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL,
) -> list[np.ndarray]:
    """Per coordinate s: the (M,) vector of mean bounds for each factor row."""
    out = []
    for f, w, n in zip(rep.factors, weights, ns):
        w = np.asarray(w, dtype=float)
        m1 = f @ w
        mp = (f ** p) @ w
        out.append(
            np.array(
                [theta_bound_iid(float(a), float(b), p, int(n), cfg).theta for a, b in zip(m1, mp)]
            )
        )
    return out


def weighted_theta_norm(
    rep: DegenerateRepresentation,
    weights,
    p: float,
    ns,
    cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL,
) -> float:
    """sum over k-vectors of |lam(k)| * prod_s Theta_{p,n(s)}[factor k_s].

    Bounds |S_L|_p for an exactly degenerate nonnegative kernel over the
    full box with side lengths ns; one mean bound per factor, per the
    component-wise triangle inequality.
    """
    if not rep.nonnegative:
        raise DomainError("weighted theta norm needs nonnegative factors")
    ns = tuple(int(n) for n in ns)
    if len(ns) != rep.d:
        raise DomainError(f"need one side length per coordinate, got {ns} for d={rep.d}")
    if any(n < 1 for n in ns):
        raise DomainError(f"side lengths must be >= 1, got {ns}")
    if p < 2.0:
        raise DomainError(f"need p >= 2, got {p}")
    vecs = _factor_theta_matrix(rep, weights, p, ns, cfg)
    t = np.abs(rep.lam)
    for v in vecs:
        t = np.tensordot(t, v, axes=([0], [0]))
    return float(t)


def w_bound(
    kernel: GridKernel,
    p: float,
    ns,
    m_max: int = 8,
    seed: int = 0,
    cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL,
    sweep=None,
) -> BoundBreakdown:
    """Best available bound on |S_L|_p over the full box with sides ns.

    Sweeps fitted degrees 1..m_max; each degree contributes its theta norm
    plus the L_p norm of the fit residual (the residual rides on the
    trivial estimate, which needs no structure).  The trivial bound always
    participates, so a failed sweep still returns a valid breakdown.

    sweep short-circuits the factorization stage with precomputed
    degree_sweep results for this kernel and p; the fitted degrees do not
    depend on the box, so batch callers reuse one sweep across many boxes.
    """
    if p < 2.0:
        raise DomainError(f"need p >= 2, got {p}")
    ns = tuple(int(n) for n in ns)
    if len(ns) != kernel.d:
        raise DomainError(f"need one side length per coordinate, got {ns} for d={kernel.d}")
    if any(n < 1 for n in ns):
        raise DomainError(f"side lengths must be >= 1, got {ns}")
    if float(kernel.values.min(initial=0.0)) < NEGATIVE_CELL_TOL:
        raise DomainError("sum bounds need a nonnegative kernel")
    trivial = trivial_bound(kernel, p)
    scale = max(trivial, 1e-300)

    terms: list[DegreeTerm] = []
    try:
        for res in sweep if sweep is not None else degree_sweep(kernel, m_max, p=p, seed=seed):
            wt = weighted_theta_norm(res.representation, kernel.weights, p, ns, cfg)
            terms.append(
                DegreeTerm(
                    degree=res.representation.degree,
                    theta_norm=wt,
                    residual_lp=res.residual_lp,
                )
            )
    except UboundNumericError:
        terms = []

    factorizable = None
    weighted_theta = None
    w_composite = None
    provenance = "trivial"
    chosen = trivial
    if terms:
        exact = [t for t in terms if t.residual_lp <= EXACT_RESIDUAL_RTOL * scale]
        if exact and exact[0].degree == 1:
            factorizable = exact[0].theta_norm
        if exact:
            weighted_theta = min(t.theta_norm for t in exact)
        best = min(terms, key=lambda t: t.total)
        w_composite = best.total
        for name, value, deg in (
            ("factorizable", factorizable, None),
            ("weighted_theta", weighted_theta, None),
            ("w_composite", w_composite, best.degree),
        ):
            if value is not None and value < chosen:
                chosen = value
                provenance = name if deg is None else f"{name}[M={deg}]"
        if provenance == "weighted_theta":
            deg = min(t.degree for t in exact if t.theta_norm == weighted_theta)
            provenance = f"weighted_theta[M={deg}]"
    return BoundBreakdown(
        p=p,
        trivial=trivial,
        factorizable=factorizable,
        weighted_theta=weighted_theta,
        w_composite=w_composite,
        chosen=chosen,
        provenance=provenance,
        per_degree=tuple(terms),
    )


def nonrect_bound(
    index_set: IndexSet,
    kernel: GridKernel,
    p: float,
    m_max: int = 8,
    seed: int = 0,
    expand: int = 0,
    cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL,
    sweep=None,
) -> float:
    """(|box| / |L|) * w_bound over a circumscribed box.

    Dropping the off-L summands can only shrink a nonnegative sum, so the
    box bound scaled by the cardinality ratio covers the ragged set.  The
    minimal box wins almost always; expand > 0 also tries boxes grown by
    up to that many indices per side and keeps the best.
    """
    if index_set.d != kernel.d:
        raise DomainError(
            f"index set dimension {index_set.d} does not match kernel dimension {kernel.d}"
        )
    if expand < 0:
        raise DomainError(f"expand must be >= 0, got {expand}")
    base = index_set.box_sides
    best = math.inf
    grows = range(expand + 1)
    for extras in np.stack(
        np.meshgrid(*([list(grows)] * len(base)), indexing="ij"), axis=-1
    ).reshape(-1, len(base)):
        sides = tuple(int(n + e) for n, e in zip(base, extras))
        ratio = math.prod(sides) / index_set.size
        w = w_bound(kernel, p, sides, m_max=m_max, seed=seed, cfg=cfg, sweep=sweep).chosen
        best = min(best, ratio * w)
    return best


def projective_growth_bound(
    rep: DegenerateRepresentation,
    weights,
    p: float,
) -> float:
    """(2/3)^d * (p / (e ln p))^d * projective quasi-norm.

    A closed-form cap on sup_L |S_L|_p that trades the per-box theta norms
    for the large-p growth rate of the one-dimensional mean bound; only
    meaningful once ln p exceeds 1.
    """
    if p <= math.e:
        raise DomainError(f"need p > e, got {p}")
    if not rep.nonnegative:
        raise DomainError("projective growth bound needs nonnegative factors")
    d = rep.d
    rate = p / (math.e * math.log(p))
    return (2.0 / 3.0) ** d * rate ** d * projective_quasi_norm(rep, weights, p)
