"""Discretized nonnegative kernels and their degenerate approximations.

A GridKernel is a d-dimensional table of kernel values over a product grid
together with one probability vector per axis; the vectors are the laws of
the coordinate samples, so every norm here is a weighted L_p norm under
the product measure.

A DegenerateRepresentation is a finite sum

    f(x_1..x_d) = sum over k-vectors of lam(k) * prod_s g^(s)_{k_s}(x_s)

with one table per factor.  Sums of products of nonnegative factors are
what the multi-index sum bounds consume; the quality of such an
approximation is measured by the weighted residual norm, and the price of
the representation by the projective quasi-norm sum |lam| * prod of
factor norms.

Approximation routes: exact spectral truncation for symmetric PSD kernels
(factors may change sign) and nonnegative matrix factorization for the
bound pipeline (factors stay nonnegative, so the averaged-sum machinery
applies).
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    NegativeKernelWarning,
    NotPSDError,
    UboundValidationError,
)

WEIGHT_SUM_TOL = 1e-12
NEGATIVE_CELL_TOL = -1e-12


def _as_readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GridKernel:
    """Kernel values tabulated on a product grid with per-axis weights."""

    axes: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(_as_readonly(a) for a in self.axes)
        weights = tuple(_as_readonly(w) for w in self.weights)
        values = _as_readonly(self.values)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", values)
        if len(axes) == 0:
            raise DomainError("kernel needs at least one axis")
        if len(axes) != len(weights):
            raise DomainError("axes and weights must pair up")
        shape = tuple(len(a) for a in axes)
        if values.shape != shape:
            raise DomainError(
                f"values shape {values.shape} does not match grid shape {shape}"
            )
        for s, w in enumerate(weights):
            if w.ndim != 1 or len(w) != shape[s]:
                raise DomainError(f"weight vector {s} does not match axis length")
            if np.any(w < 0.0):
                raise DomainError(f"weights on axis {s} must be >= 0")
            if abs(float(w.sum()) - 1.0) > WEIGHT_SUM_TOL:
                raise DomainError(
                    f"weights on axis {s} must sum to 1, got {float(w.sum())!r}"
                )
        if float(values.min(initial=0.0)) < NEGATIVE_CELL_TOL:
            warnings.warn(
                "kernel has negative cells; sum bounds assume f >= 0",
                NegativeKernelWarning,
                stacklevel=2,
            )

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape


def lp_norm(kernel: GridKernel, p: float) -> float:
    """Weighted L_p norm of the kernel under the product of axis laws."""
    if p <= 0.0:
        raise DomainError(f"need p > 0, got {p}")
    t = np.abs(kernel.values) ** p
    for w in kernel.weights:
        t = np.tensordot(t, w, axes=([0], [0]))
    return float(t) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class DegenerateRepresentation:
    """Finite sum of factored products approximating a kernel.

    lam has shape (M,)*d; factors[s] has shape (M, n_s).  Factors are
    nonnegative unless the representation was produced by a spectral
    method; `nonnegative` records which case holds, and the averaged-sum
    bound machinery refuses signed representations.
    """

    lam: np.ndarray
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        lam = _as_readonly(self.lam)
        factors = tuple(_as_readonly(f) for f in self.factors)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "factors", factors)
        d = lam.ndim
        if d == 0 or d != len(factors):
            raise DomainError("lam dimensionality must match the factor count")
        m = lam.shape[0]
        if any(sz != m for sz in lam.shape):
            raise DomainError("lam must be square in every direction")
        for s, f in enumerate(factors):
            if f.ndim != 2 or f.shape[0] != m:
                raise DomainError(f"factor table {s} must have shape (M, n_{s})")
        if not (np.all(np.isfinite(lam)) and all(np.all(np.isfinite(f)) for f in factors)):
            raise DomainError("representation entries must be finite")

    @property
    def d(self) -> int:
        return self.lam.ndim

    @property
    def degree(self) -> int:
        return self.lam.shape[0]

    @property
    def nonnegative(self) -> bool:
        return all(float(f.min(initial=0.0)) >= NEGATIVE_CELL_TOL for f in self.factors)


def rank1_representation(factors) -> DegenerateRepresentation:
    """Degree-1 representation from one table per coordinate."""
    fs = tuple(np.asarray(f, dtype=float).reshape(1, -1) for f in factors)
    lam = np.ones((1,) * len(fs))
    return DegenerateRepresentation(lam=lam, factors=fs)


def materialize(rep: DegenerateRepresentation, axes, weights) -> GridKernel:
    """Evaluate the representation into a GridKernel on the given grid.

    Negative cells (possible when some lam < 0) trigger
    NegativeKernelWarning via the GridKernel constructor.
    """
    t = rep.lam
    for f in rep.factors:
        # consume the leading representation axis, append the grid axis
        t = np.tensordot(t, f, axes=([0], [0]))
    return GridKernel(axes=tuple(axes), weights=tuple(weights), values=t)


def factor_lp_norms(rep: DegenerateRepresentation, weights, p: float) -> list[np.ndarray]:
    """Weighted L_p norm of every factor: one (M,) vector per coordinate."""
    if p <= 0.0:
        raise DomainError(f"need p > 0, got {p}")
    out = []
    for f, w in zip(rep.factors, weights):
        w = np.asarray(w, dtype=float)
        out.append((np.abs(f) ** p @ w) ** (1.0 / p))
    return out


def projective_quasi_norm(rep: DegenerateRepresentation, weights, p: float) -> float:
    """sum over k-vectors of |lam(k)| * prod_s |g^(s)_{k_s}|_p.

    An upper bound on the kernel's own weighted L_p norm by the triangle
    inequality; representation-dependent, so the best value over all
    representations seen is the one worth reporting.
    """
    norms = factor_lp_norms(rep, weights, p)
    t = np.abs(rep.lam)
    for v in norms:
        t = np.tensordot(t, v, axes=([0], [0]))
    return float(t)


def projective_quasi_norm_quick(
    rep: DegenerateRepresentation, weights, p: float
) -> float:
    """Cheap over-estimate G(p) * ||lam||_1 with G(p) = max factor-norm product."""
    norms = factor_lp_norms(rep, weights, p)
    g = 1.0
    for v in norms:
        g *= float(v.max(initial=0.0))
    return g * float(np.abs(rep.lam).sum())


@dataclass(frozen=True)
class ApproxResult:
    """One degenerate approximation of a kernel.

    residual_lp is the weighted L_p norm of kernel - materialized
    representation at the requested p; residual_l2 is the same residual in
    weighted L_2 (the objective the optimizers actually minimize);
    spectral_tail_sum is only set by the spectral route (sum of the
    discarded eigenvalues).
    """

    representation: DegenerateRepresentation
    p: float
    residual_lp: float
    residual_l2: float
    iterations: int
    converged: bool
    spectral_tail_sum: float | None = None


def _residuals(kernel: GridKernel, rep: DegenerateRepresentation, p: float):
    t = rep.lam
    for f in rep.factors:
        t = np.tensordot(t, f, axes=([0], [0]))
    diff = kernel.values - t
    rp = np.abs(diff) ** p
    r2 = diff * diff
    for w in kernel.weights:
        rp = np.tensordot(rp, w, axes=([0], [0]))
        r2 = np.tensordot(r2, w, axes=([0], [0]))
    return float(rp) ** (1.0 / p), math.sqrt(float(r2))


def eigen_truncation(kernel: GridKernel, m: int, p: float = 2.0) -> ApproxResult:
    """Spectral rank-M truncation of a symmetric PSD kernel (d = 2).

    Diagonalizes the weighted operator D^(1/2) F D^(1/2) and keeps the M
    leading eigenpairs.  Eigenfactors may change sign, so the result is
    only usable for norm accounting, not for the averaged-sum bounds.
    Reports the discarded eigenvalue sum alongside the weighted-L2
    residual sqrt(sum of squared discarded eigenvalues); the two answer
    different questions (projective price vs orthonormal-expansion error)
    and genuinely differ, so both are kept.
    """
    if kernel.d != 2:
        raise DomainError("spectral truncation needs a two-coordinate kernel")
    n1, n2 = kernel.shape
    if n1 != n2:
        raise DomainError("spectral truncation needs a square kernel table")
    if not np.allclose(kernel.values, kernel.values.T, rtol=0.0, atol=1e-10):
        raise DomainError("spectral truncation needs a symmetric kernel table")
    w0, w1 = kernel.weights
    if not np.allclose(w0, w1, rtol=0.0, atol=1e-12):
        raise DomainError("spectral truncation needs matching axis weights")
    if m < 1:
        raise DomainError(f"need M >= 1, got {m}")
    sq = np.sqrt(w0)
    sym = sq[:, None] * kernel.values * sq[None, :]
    evals, evecs = np.linalg.eigh(sym)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    top = float(evals[0]) if len(evals) else 0.0
    if float(evals[-1]) < -1e-8 * max(top, 1.0):
        raise NotPSDError(
            f"kernel is not positive semidefinite under its weights "
            f"(min eigenvalue {float(evals[-1])!r})"
        )
    m = min(m, n1)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(sq > 0.0, evecs / sq[:, None], 0.0).T  # (n, M) -> (M rows)
    kept = np.clip(evals[:m], 0.0, None)
    lam = np.diag(kept)
    factors = (phi[:m].copy(), phi[:m].copy())
    rep = DegenerateRepresentation(lam=lam, factors=factors)
    tail = np.clip(evals[m:], 0.0, None)
    residual_l2 = math.sqrt(float(np.sum(tail * tail)))
    residual_lp, r2_check = _residuals(kernel, rep, p)
    # the eigenvalue account and the table account must agree
    if abs(r2_check - residual_l2) > 1e-8 * max(1.0, residual_l2):
        residual_l2 = r2_check
    return ApproxResult(
        representation=rep,
        p=p,
        residual_lp=residual_lp,
        residual_l2=residual_l2,
        iterations=0,
        converged=True,
        spectral_tail_sum=float(np.sum(tail)),
    )


MU_WARMUP = 30
CONVERGENCE_RTOL = 1e-10


def _svd_split_init(v: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic nonnegative init from the leading singular triplets.

    Each triplet contributes whichever of its (+,+) or (-,-) sign pattern
    carries more mass; zeros are floored so no update rule can get stuck on
    an identically dead entry.  Random restarts alone miss the global
    optimum on near-collinear exact-rank tables; this start does not.
    """
    u, s, vt = np.linalg.svd(v, full_matrices=False)
    n1, n2 = v.shape
    w = np.zeros((n1, m))
    h = np.zeros((m, n2))
    if s.size:
        w[:, 0] = math.sqrt(s[0]) * np.abs(u[:, 0])
        h[0, :] = math.sqrt(s[0]) * np.abs(vt[0, :])
    for j in range(1, min(m, s.size)):
        x, y = u[:, j], vt[j, :]
        xp, xn = np.clip(x, 0.0, None), np.clip(-x, 0.0, None)
        yp, yn = np.clip(y, 0.0, None), np.clip(-y, 0.0, None)
        mass_p = float(np.linalg.norm(xp) * np.linalg.norm(yp))
        mass_n = float(np.linalg.norm(xn) * np.linalg.norm(yn))
        xx, yy, mass = (xp, yp, mass_p) if mass_p >= mass_n else (xn, yn, mass_n)
        if mass > 0.0:
            w[:, j] = math.sqrt(s[j] * mass) * xx / np.linalg.norm(xx)
            h[j, :] = math.sqrt(s[j] * mass) * yy / np.linalg.norm(yy)
    floor = max(float(v.mean()), 1e-30) * 1e-8
    w[w == 0.0] = floor
    h[h == 0.0] = floor
    return w, h


def _nnmf_once(v: np.ndarray, m: int, rng, iters: int, winit=None, hinit=None):
    """Nonnegative Frobenius factorization of v (>= 0) at rank m.

    Returns (w, h, iterations, converged).  A short multiplicative-update
    warmup spreads the initial mass, then per-component alternating least
    squares with clipping at zero drives the residual down; plain
    multiplicative updates alone stall orders of magnitude short of the
    recovery tolerance on exact-rank tables.  Initial factors are
    uniform(0.1, 1.1) scaled to spread the table's mass evenly over the m
    components unless start tables are supplied.  Converged means the
    objective's relative improvement per sweep fell below CONVERGENCE_RTOL.
    """
    eps = 1e-12
    n1, n2 = v.shape
    scale = math.sqrt(max(float(v.mean()), eps) / m)
    w = rng.uniform(0.1, 1.1, size=(n1, m)) * scale if winit is None else winit.copy()
    h = rng.uniform(0.1, 1.1, size=(m, n2)) * scale if hinit is None else hinit.copy()
    for _ in range(min(MU_WARMUP, iters)):
        wh = w @ h
        h *= (w.T @ v) / (w.T @ wh + eps)
        wh = w @ h
        w *= (v @ h.T) / (wh @ h.T + eps)
    prev = None
    it = 0
    r = v - w @ h
    for it in range(1, iters + 1):
        for k in range(m):
            r += np.outer(w[:, k], h[k, :])
            hn = float(h[k, :] @ h[k, :])
            if hn > eps:
                w[:, k] = np.clip(r @ h[k, :] / hn, 0.0, None)
            wn = float(w[:, k] @ w[:, k])
            if wn > eps:
                h[k, :] = np.clip(r.T @ w[:, k] / wn, 0.0, None)
            else:
                # dead component: reseed tiny so it can re-enter
                w[:, k] = rng.uniform(0.1, 1.1, size=n1) * (scale * 1e-6)
                h[k, :] = rng.uniform(0.1, 1.1, size=n2) * (scale * 1e-6)
            r -= np.outer(w[:, k], h[k, :])
        obj = float(np.linalg.norm(r))
        if prev is not None and prev - obj < CONVERGENCE_RTOL * max(prev, 1e-300):
            return w, h, it, True
        prev = obj
    return w, h, it, False


N_RESTARTS = 3
EARLY_EXIT_RTOL = 1e-10


def nnmf_approximate(
    kernel: GridKernel,
    m: int,
    p: float = 2.0,
    seed: int = 0,
    iters: int = 20_000,
    warm_start: DegenerateRepresentation | None = None,
) -> ApproxResult:
    """Best-of-starts nonnegative factorization of a d = 2 kernel.

    Minimizes the weighted L_2 residual on the weight-conjugated table,
    trying the warm start (if any), the singular-triplet split start, and
    N_RESTARTS seeded random starts in a fixed order; a start whose
    residual reaches EARLY_EXIT_RTOL relative skips the rest.  The
    residual in the requested p is the L_p norm of the same L_2-optimal
    residual table, which stays a valid upper estimate of the degree-M
    approximation error.  Deterministic for a fixed seed.
    """
    if kernel.d != 2:
        raise DomainError("nonnegative factorization needs a two-coordinate kernel")
    if m < 1:
        raise DomainError(f"need M >= 1, got {m}")
    if p < 1.0:
        raise DomainError(f"need p >= 1, got {p}")
    w0, w1 = kernel.weights
    sq0, sq1 = np.sqrt(w0), np.sqrt(w1)
    v = sq0[:, None] * kernel.values * sq1[None, :]

    candidates = []
    if warm_start is not None:
        if warm_start.d != 2 or not warm_start.nonnegative:
            raise DomainError("warm start must be a nonnegative d = 2 representation")
        mw = warm_start.degree
        if mw > m:
            raise DomainError("warm start degree exceeds target degree")
        gw = np.clip(warm_start.factors[0], 0.0, None)
        hw = np.clip(warm_start.factors[1], 0.0, None)
        scl = np.sqrt(np.abs(np.diagonal(warm_start.lam)))
        wt = (gw * sq0[None, :]).T * scl
        ht = (hw * sq1[None, :]) * scl[:, None]
        pad = m - mw
        if pad:
            rng = np.random.default_rng(seed ^ 0x5EED)
            tiny = 1e-6 * math.sqrt(max(float(v.mean()), 1e-12))
            wt = np.hstack([wt, rng.uniform(0.1, 1.1, size=(v.shape[0], pad)) * tiny])
            ht = np.vstack([ht, rng.uniform(0.1, 1.1, size=(pad, v.shape[1])) * tiny])
        candidates.append(("warm", wt, ht))
    candidates.append(("svd", *_svd_split_init(v, m)))
    for r in range(N_RESTARTS):
        candidates.append((f"fresh{r}", None, None))

    vnorm = float(np.linalg.norm(v))
    best = None
    for tag_idx, (_tag, wt, ht) in enumerate(candidates):
        rng = np.random.default_rng((seed * 1_000_003 + tag_idx) & 0xFFFFFFFF)
        w, h, it, conv = _nnmf_once(v, m, rng, iters, winit=wt, hinit=ht)
        obj = float(np.linalg.norm(v - w @ h))
        if best is None or obj < best[0]:
            best = (obj, w, h, it, conv)
        if obj <= EARLY_EXIT_RTOL * max(vnorm, 1e-300):
            break
    _, w, h, it, conv = best

    # back out weighted factors, fold column scales into lam
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(sq0[:, None] > 0.0, w / sq0[:, None], 0.0)
        hh = np.where(sq1[None, :] > 0.0, h / sq1[None, :], 0.0)
    lam = np.zeros((m, m))
    gf = np.zeros((m, g.shape[0]))
    hf = np.zeros((m, hh.shape[1]))
    for k in range(m):
        gn = math.sqrt(float((g[:, k] ** 2) @ w0))
        hn = math.sqrt(float((hh[k, :] ** 2) @ w1))
        if gn > 0.0 and hn > 0.0:
            lam[k, k] = gn * hn
            gf[k] = g[:, k] / gn
            hf[k] = hh[k, :] / hn
    rep = DegenerateRepresentation(lam=lam, factors=(gf, hf))
    residual_lp, residual_l2 = _residuals(kernel, rep, p)
    return ApproxResult(
        representation=rep,
        p=p,
        residual_lp=residual_lp,
        residual_l2=residual_l2,
        iterations=it,
        converged=conv,
    )


def degree_sweep(
    kernel: GridKernel,
    m_max: int,
    p: float = 2.0,
    seed: int = 0,
    iters: int = 20_000,
) -> list[ApproxResult]:
    """Factorizations for M = 1..m_max, warm-starting each from the last.

    The weighted-L2 residual sequence is nonincreasing: each degree is
    also offered the previous representation padded with a zero component,
    so a worse refit can never be reported.
    """
    if m_max < 1:
        raise DomainError(f"need m_max >= 1, got {m_max}")
    out: list[ApproxResult] = []
    prev: ApproxResult | None = None
    for m in range(1, m_max + 1):
        res = nnmf_approximate(
            kernel,
            m,
            p=p,
            seed=seed + m,
            iters=iters,
            warm_start=prev.representation if prev is not None else None,
        )
        if prev is not None and res.residual_l2 > prev.residual_l2:
            # pad the previous representation with a zero component
            lam = np.zeros((m, m))
            lam[: m - 1, : m - 1] = prev.representation.lam
            gf = np.zeros((m, kernel.shape[0]))
            hf = np.zeros((m, kernel.shape[1]))
            gf[: m - 1] = prev.representation.factors[0]
            hf[: m - 1] = prev.representation.factors[1]
            rep = DegenerateRepresentation(lam=lam, factors=(gf, hf))
            res = ApproxResult(
                representation=rep,
                p=p,
                residual_lp=prev.residual_lp,
                residual_l2=prev.residual_l2,
                iterations=res.iterations,
                converged=res.converged,
            )
        out.append(res)
        prev = res
    return out


# ---------------------------------------------------------------------------
# presets and serialization

WEIGHTINGS = ("uniform", "geometric", "linear")


def _axis(n: int):
    return (np.arange(n) + 0.5) / n


def _axis_weights(n: int, weighting: str) -> np.ndarray:
    if weighting == "uniform":
        w = np.ones(n)
    elif weighting == "geometric":
        w = 0.7 ** np.arange(n)
    elif weighting == "linear":
        w = np.arange(1, n + 1, dtype=float)
    else:
        raise DomainError(f"unknown weighting {weighting!r}; pick from {WEIGHTINGS}")
    return w / w.sum()


PRESET_NAMES = ("constant", "rank1", "rank2", "rank3", "minxy", "expxy")


def preset_representation(name: str, n: int = 16) -> DegenerateRepresentation | None:
    """Known exact representation of a preset kernel, when one exists."""
    x = _axis(n)
    if name == "constant":
        return rank1_representation([np.ones(n), np.ones(n)])
    if name == "rank1":
        return rank1_representation([np.exp(-x), 0.5 + x])
    if name == "rank2":
        lam = np.diag([1.0, 0.6])
        f = np.vstack([np.ones(n), x])
        return DegenerateRepresentation(lam=lam, factors=(f, f.copy()))
    if name == "rank3":
        lam = np.diag([1.0, 0.5, 0.25])
        f = np.vstack([np.ones(n), x, x * x])
        return DegenerateRepresentation(lam=lam, factors=(f, f.copy()))
    if name == "expxy":
        # exp(-x-y)(1 + xy) = e^-x e^-y + (x e^-x)(y e^-y)
        lam = np.diag([1.0, 1.0])
        f = np.vstack([np.exp(-x), x * np.exp(-x)])
        return DegenerateRepresentation(lam=lam, factors=(f, f.copy()))
    if name == "minxy":
        return None
    raise DomainError(f"unknown preset {name!r}; pick from {PRESET_NAMES}")


def preset_kernel(name: str, n: int = 16, weighting: str = "uniform") -> GridKernel:
    """Named d = 2 kernel on the midpoint grid of [0,1] with n cells per axis."""
    x = _axis(n)
    w = _axis_weights(n, weighting)
    rep = preset_representation(name, n)
    if rep is not None:
        return materialize(rep, axes=(x, x), weights=(w, w))
    if name == "minxy":
        values = np.minimum(x[:, None], x[None, :])
        return GridKernel(axes=(x, x), weights=(w, w), values=values)
    raise DomainError(f"unknown preset {name!r}; pick from {PRESET_NAMES}")


def kernel_to_dict(kernel: GridKernel, rep: DegenerateRepresentation | None = None) -> dict:
    out = {
        "axes": [list(map(float, a)) for a in kernel.axes],
        "weights": [list(map(float, w)) for w in kernel.weights],
        "values": kernel.values.tolist(),
    }
    if rep is not None:
        out["representation"] = {
            "lambda": rep.lam.tolist(),
            "factors": [f.tolist() for f in rep.factors],
        }
    return out


def kernel_from_dict(data: dict) -> tuple[GridKernel, DegenerateRepresentation | None]:
    """Parse a kernel description: axes + weights + values or representation.

    When only a representation is given the kernel table is materialized
    from it; when both are given the representation must reproduce the
    table to within 1e-8 relative, otherwise it is rejected (a mismatched
    representation would silently invalidate every bound built from it).
    """
    if "axes" not in data or "weights" not in data:
        raise UboundValidationError("kernel description needs 'axes' and 'weights'")
    axes = [np.asarray(a, dtype=float) for a in data["axes"]]
    weights = [np.asarray(w, dtype=float) for w in data["weights"]]
    rep = None
    if "representation" in data:
        r = data["representation"]
        rep = DegenerateRepresentation(
            lam=np.asarray(r["lambda"], dtype=float),
            factors=tuple(np.asarray(f, dtype=float) for f in r["factors"]),
        )
    if "values" in data:
        kernel = GridKernel(
            axes=tuple(axes),
            weights=tuple(weights),
            values=np.asarray(data["values"], dtype=float),
        )
        if rep is not None:
            check = materialize(rep, axes=axes, weights=weights)
            scale = max(float(np.abs(kernel.values).max()), 1e-300)
            if float(np.abs(check.values - kernel.values).max()) > 1e-8 * scale:
                raise UboundValidationError(
                    "representation does not reproduce the kernel table"
                )
    elif rep is not None:
        kernel = materialize(rep, axes=axes, weights=weights)
    else:
        raise UboundValidationError(
            "kernel description needs 'values' or 'representation'"
        )
    return kernel, rep


def load_kernel_file(path: str) -> tuple[GridKernel, DegenerateRepresentation | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return kernel_from_dict(json.load(fh))
