"""Ground-truth engines for the bound calculators.

Two independent referees: exact enumeration of small finite sample
spaces, and a chunked Monte Carlo harness whose output is bit-identical
for a fixed (seed, n_chunks) no matter how many workers run the chunks.
Also houses the single-point lower bound and the sandwich-ratio
diagnostics that frame every upper bound from below.

Chunk determinism: chunk i draws from a counter-based Philox stream
keyed by two applications of the splitmix64 finalizer to (seed, i), and
partial sums are folded in chunk-index order.  Worker count only decides
who computes a chunk, never what the chunk contains.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bell
from .bounds import IndexSet
from .errors import DomainError, TooLargeError
from .kernels import DegenerateRepresentation, GridKernel, factor_lp_norms, lp_norm
from .onedim import theta_bound_iid

ENUM_GUARD = 10_000_000
MIN_TAIL_EXCEEDANCES = 30
SIGMA = 3.0
# rounding slack for the FAIL verdicts, not a statistical allowance: a
# degenerate statistic (stderr 0) must not fail on an ulp lost in the
# bound's exp/log arithmetic
VERDICT_RTOL = 1e-9

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def chunk_stream(seed: int, chunk_index: int) -> np.random.Generator:
    """The RNG for one chunk; a pure function of (seed, chunk_index)."""
    hi = _splitmix64(seed & _MASK64)
    lo = _splitmix64((seed & _MASK64) ^ _splitmix64(chunk_index + 1))
    return np.random.Generator(np.random.Philox(key=(hi << 64) | lo))


def _worker_count() -> int:
    raw = os.environ.get("UBOUND_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# coordinate distributions


class DistributionSpec:
    """Nonnegative coordinate distribution with closed-form moments."""

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def moment(self, p: float) -> float:
        """E X^p."""
        raise NotImplementedError

    @property
    def mean(self) -> float:
        return self.moment(1.0)


@dataclass(frozen=True, eq=False)
class FiniteDiscrete(DistributionSpec):
    atoms: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        atoms = tuple(float(a) for a in self.atoms)
        probs = tuple(float(q) for q in self.probs)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if not atoms or len(atoms) != len(probs):
            raise DomainError("need matching nonempty atoms and probs")
        if any(a < 0.0 for a in atoms):
            raise DomainError("atoms must be nonnegative")
        if any(q < 0.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise DomainError("probs must be nonnegative and sum to 1")

    def sample(self, rng, size):
        return np.asarray(self.atoms)[self.sample_indices(rng, size)]

    def sample_indices(self, rng, size) -> np.ndarray:
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        return np.searchsorted(cum, rng.random(size), side="right")

    def moment(self, p):
        return float(np.dot(self.probs, np.asarray(self.atoms) ** p))


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float = 1.0

    def __post_init__(self):
        if self.rate <= 0.0:
            raise DomainError(f"need rate > 0, got {self.rate}")

    def sample(self, rng, size):
        return rng.standard_exponential(size) / self.rate

    def moment(self, p):
        return math.gamma(p + 1.0) / self.rate ** p


@dataclass(frozen=True)
class Poisson(DistributionSpec):
    beta: float = 1.0

    def __post_init__(self):
        if self.beta <= 0.0:
            raise DomainError(f"need beta > 0, got {self.beta}")

    def sample(self, rng, size):
        # generator switches to inversion below mean 10, rejection above
        return rng.poisson(self.beta, size).astype(float)

    def moment(self, p):
        return bell.bell_value(p, self.beta)


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0.0:
            raise DomainError(f"need c > 0, got {self.c}")

    def sample(self, rng, size):
        return self.c * rng.random(size)

    def moment(self, p):
        return self.c ** p / (p + 1.0)


@dataclass(frozen=True)
class LogNormal(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise DomainError(f"need sigma > 0, got {self.sigma}")

    def sample(self, rng, size):
        return rng.lognormal(self.mu, self.sigma, size)

    def moment(self, p):
        return math.exp(p * self.mu + 0.5 * (p * self.sigma) ** 2)


def grid_marginals(kernel: GridKernel) -> tuple[FiniteDiscrete, ...]:
    """Index distributions of a grid kernel: atom j is grid cell j."""
    return tuple(
        FiniteDiscrete(atoms=tuple(range(len(w))), probs=tuple(w))
        for w in kernel.weights
    )


# ---------------------------------------------------------------------------
# normalized multi-index sums over sampled coordinates


@dataclass(frozen=True, eq=False)
class ProductFunctionKernel:
    """Kernel in factorized functional form for continuous coordinates.

    f(x_1..x_d) = sum over index tuples m of lam[m] * prod_s fns[s][m_s](x_s),
    with vectorized factor callables.
    """

    lam: np.ndarray
    fns: tuple[tuple, ...]

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "fns", tuple(tuple(f) for f in self.fns))
        d = lam.ndim
        if d == 0 or len(self.fns) != d:
            raise DomainError("need one factor list per kernel argument")
        for s, fl in enumerate(self.fns):
            if len(fl) != lam.shape[s]:
                raise DomainError(
                    f"coordinate {s}: {len(fl)} factors vs weight extent {lam.shape[s]}"
                )

    @property
    def d(self) -> int:
        return self.lam.ndim


_EINSUM_BOX = {1: "a,ab->b", 2: "ac,ab,cb->b", 3: "ace,ab,cb,eb->b"}
_EINSUM_PTS = {1: "a,abl->bl", 2: "ac,abl,cbl->bl", 3: "ace,abl,cbl,ebl->bl"}


def _row_lookup(row: np.ndarray):
    return lambda ix: row[ix]


def _normalize_kernel(kernel):
    """-> (grid or functional kernel, whether samples are cell indices)."""
    if isinstance(kernel, GridKernel):
        return kernel, True
    if isinstance(kernel, DegenerateRepresentation):
        fns = tuple(tuple(_row_lookup(row) for row in f) for f in kernel.factors)
        return ProductFunctionKernel(lam=kernel.lam, fns=fns), True
    if isinstance(kernel, ProductFunctionKernel):
        return kernel, False
    raise DomainError(f"cannot realize sums for {type(kernel).__name__}")


def _batch_sums(kernel, samples, index_set: IndexSet) -> np.ndarray:
    """Normalized sums for a batch: samples[s] has shape (B, n_s)."""
    pts = np.asarray(index_set.points, dtype=int)
    d = index_set.d
    for s in range(d):
        if samples[s].shape[1] < int(pts[:, s].max()):
            raise DomainError(
                f"coordinate {s}: samples cover {samples[s].shape[1]} indices, "
                f"the index set needs {int(pts[:, s].max())}"
            )

    if isinstance(kernel, GridKernel):
        if kernel.d != d:
            raise DomainError(f"kernel takes {kernel.d} arguments, index set has {d}")
        gathered = tuple(samples[s][:, pts[:, s] - 1] for s in range(d))
        vals = kernel.values[tuple(gathered)]
        return vals.mean(axis=1)

    if kernel.d != d:
        raise DomainError(f"kernel takes {kernel.d} arguments, index set has {d}")
    if d not in _EINSUM_BOX:
        raise DomainError(f"functional kernels support up to 3 arguments, got {d}")

    if index_set.is_box:
        # factorized identity: the box sum is a product of per-coordinate
        # sample means, one term per factor tuple
        ops = []
        for s in range(d):
            lo, hi = int(pts[:, s].min()), int(pts[:, s].max())
            block = samples[s][:, lo - 1 : hi]
            ops.append(np.stack([np.mean(f(block), axis=1) for f in kernel.fns[s]]))
        return np.einsum(_EINSUM_BOX[d], kernel.lam, *ops)

    ops = []
    for s in range(d):
        cols = samples[s][:, pts[:, s] - 1]
        ops.append(np.stack([f(cols) for f in kernel.fns[s]]))
    return np.einsum(_EINSUM_PTS[d], kernel.lam, *ops).mean(axis=1)


def s_l_realize(kernel, samples, index_set: IndexSet) -> float:
    """One realization of the normalized sum over the index set.

    samples: one 1-d array per coordinate, entry i the i-th drawn value
    (grid kernels and representations take integer cell indices instead
    of values).  Full boxes with factorized kernels take the fast path:
    the box sum collapses to products of per-coordinate sample means.
    """
    kernel, _ = _normalize_kernel(kernel)
    batched = tuple(np.atleast_2d(np.asarray(a)) for a in samples)
    if len(batched) != index_set.d:
        raise DomainError("need one sample array per coordinate")
    return float(_batch_sums(kernel, batched, index_set)[0])


# ---------------------------------------------------------------------------
# Monte Carlo harness


@dataclass(frozen=True)
class McConfig:
    n_samples: int
    seed: int
    n_chunks: int = 16
    p_list: tuple[float, ...] = (2.0,)
    y_grid: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_samples < 1:
            raise DomainError(f"need n_samples >= 1, got {self.n_samples}")
        if self.n_chunks < 1:
            raise DomainError(f"need n_chunks >= 1, got {self.n_chunks}")
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        object.__setattr__(self, "y_grid", tuple(float(y) for y in self.y_grid))
        if any(p < 1.0 for p in self.p_list):
            raise DomainError("moment orders must be >= 1")
        if list(self.y_grid) != sorted(self.y_grid):
            raise DomainError("y_grid must be ascending")


@dataclass(frozen=True)
class MomentCheck:
    p: float
    estimate: float  # empirical p-th moment root
    stderr: float  # delta-method standard error on the root
    bound: float | None
    exact: float | None
    status: str


@dataclass(frozen=True)
class TailCheck:
    y: float
    empirical: float
    ci_lo: float
    ci_hi: float
    exceedances: int
    bound: float | None
    status: str


@dataclass(frozen=True)
class VerifyReport:
    n_samples: int
    seed: int
    n_chunks: int
    moments: tuple[MomentCheck, ...] = ()
    tails: tuple[TailCheck, ...] = ()
    label: str = ""

    @property
    def worst_status(self) -> str:
        order = {"PASS": 0, "INCONCLUSIVE": 1, "FAIL": 2}
        statuses = [c.status for c in self.moments] + [c.status for c in self.tails]
        return max(statuses, key=order.__getitem__, default="PASS")


def wilson_interval(k: int, n: int, z: float = SIGMA) -> tuple[float, float]:
    """Score interval for a binomial proportion; robust at zero counts."""
    if n < 1:
        raise DomainError("need at least one trial")
    denom = n + z * z
    center = (k + 0.5 * z * z) / denom
    half = z * math.sqrt(k * (n - k) / n + 0.25 * z * z) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _chunk_sizes(n: int, k: int) -> list[int]:
    k = min(k, n)
    base, extra = divmod(n, k)
    return [base + 1] * extra + [base] * (k - extra)


def _sample_coordinates(wants_indices, dists, n_cols, rng, batch):
    cols = []
    for s, n_s in enumerate(n_cols):
        spec = dists[s]
        if wants_indices:
            if not isinstance(spec, FiniteDiscrete):
                raise DomainError("grid kernels need finite index distributions")
            cols.append(spec.sample_indices(rng, (batch, n_s)))
        else:
            cols.append(spec.sample(rng, (batch, n_s)))
    return tuple(cols)


def _resolve_dists(kernel, dists):
    if dists is None:
        if not isinstance(kernel, GridKernel):
            raise DomainError("coordinate distributions are required for functional kernels")
        return grid_marginals(kernel)
    return tuple(dists)


def _mc_accumulate(kernel, dists, index_set: IndexSet, cfg: McConfig):
    """Chunked sampling pass; returns (moment sums, square sums, tail counts)."""
    dists = _resolve_dists(kernel, dists)
    kernel, wants_indices = _normalize_kernel(kernel)
    if len(dists) != index_set.d:
        raise DomainError("need one distribution per coordinate")
    pts = np.asarray(index_set.points, dtype=int)
    n_cols = tuple(int(pts[:, s].max()) for s in range(index_set.d))
    sizes = _chunk_sizes(cfg.n_samples, cfg.n_chunks)
    ps = np.asarray(cfg.p_list)
    ys = np.asarray(cfg.y_grid)

    def one_chunk(i: int):
        rng = chunk_stream(cfg.seed, i)
        samples = _sample_coordinates(wants_indices, dists, n_cols, rng, sizes[i])
        s_vals = _batch_sums(kernel, samples, index_set)
        pow_sums = np.array([np.sum(s_vals**p) for p in ps])
        sq_sums = np.array([np.sum(s_vals ** (2.0 * p)) for p in ps])
        counts = np.array([int(np.sum(s_vals >= y)) for y in ys], dtype=np.int64)
        return pow_sums, sq_sums, counts

    workers = _worker_count()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_chunk, range(len(sizes))))
    else:
        results = [one_chunk(i) for i in range(len(sizes))]

    # fold in chunk-index order so the float result never depends on timing
    pow_total = np.zeros(len(ps))
    sq_total = np.zeros(len(ps))
    count_total = np.zeros(len(ys), dtype=int)
    for pow_sums, sq_sums, counts in results:
        pow_total += pow_sums
        sq_total += sq_sums
        count_total += counts
    return pow_total, sq_total, count_total


def _moment_checks(cfg, pow_total, sq_total, bounds, exacts) -> tuple[MomentCheck, ...]:
    n = cfg.n_samples
    out = []
    for i, p in enumerate(cfg.p_list):
        mean_pow = pow_total[i] / n
        var_pow = max(sq_total[i] / n - mean_pow * mean_pow, 0.0)
        root = mean_pow ** (1.0 / p)
        if mean_pow > 0.0:
            stderr = math.sqrt(var_pow / n) * root / (p * mean_pow)
        else:
            stderr = 0.0
        bound = bounds.get(p) if bounds else None
        if bound is None:
            status = "INCONCLUSIVE"
        elif bound < (root - SIGMA * stderr) * (1.0 - VERDICT_RTOL):
            status = "FAIL"
        else:
            status = "PASS"
        out.append(
            MomentCheck(
                p=p,
                estimate=root,
                stderr=stderr,
                bound=bound,
                exact=exacts.get(p) if exacts else None,
                status=status,
            )
        )
    return tuple(out)


def _tail_checks(cfg, count_total, tail_bound) -> tuple[TailCheck, ...]:
    n = cfg.n_samples
    out = []
    for j, y in enumerate(cfg.y_grid):
        k = int(count_total[j])
        lo, hi = wilson_interval(k, n)
        bound = None if tail_bound is None else float(tail_bound(y))
        if bound is None:
            status = "INCONCLUSIVE"
        elif bound >= lo * (1.0 - VERDICT_RTOL):
            status = "PASS"
        elif k >= MIN_TAIL_EXCEEDANCES:
            status = "FAIL"
        else:
            # too few exceedances to call a provable bound wrong
            status = "INCONCLUSIVE"
        out.append(
            TailCheck(
                y=y,
                empirical=k / n,
                ci_lo=lo,
                ci_hi=hi,
                exceedances=k,
                bound=bound,
                status=status,
            )
        )
    return tuple(out)


def verify_run(
    kernel,
    dists,
    index_set: IndexSet,
    cfg: McConfig,
    moment_bounds: dict | None = None,
    tail_bound=None,
    exact_moments: dict | None = None,
    label: str = "",
) -> VerifyReport:
    """One sampling pass feeding both the moment and the tail checks.

    moment_bounds maps p to the bound under test; tail_bound maps y to a
    probability bound.  FAIL is only declared outside the 3-sigma band,
    and tail FAILs additionally need 30 observed exceedances.
    """
    pow_total, sq_total, count_total = _mc_accumulate(kernel, dists, index_set, cfg)
    return VerifyReport(
        n_samples=cfg.n_samples,
        seed=cfg.seed,
        n_chunks=cfg.n_chunks,
        moments=_moment_checks(cfg, pow_total, sq_total, moment_bounds, exact_moments),
        tails=_tail_checks(cfg, count_total, tail_bound),
        label=label,
    )


def mc_moments(kernel, dists, index_set, cfg, bounds=None, exact=None):
    return verify_run(kernel, dists, index_set, cfg, moment_bounds=bounds, exact_moments=exact).moments


def mc_tail(kernel, dists, index_set, cfg, tail_bound=None):
    return verify_run(kernel, dists, index_set, cfg, tail_bound=tail_bound).tails


# ---------------------------------------------------------------------------
# exact enumeration


def exact_moment(kernel: GridKernel, index_set: IndexSet, p: int, dists=None) -> float:
    """E S_L^p by full enumeration of the finite product sample space.

    Every assignment of a grid cell to each coordinate sample index is
    visited once with its probability weight; feasible only while
    prod_s (support size)^(n_s) stays under the guard.
    """
    if int(p) != p or p < 1:
        raise DomainError(f"exact enumeration needs integer p >= 1, got {p}")
    p = int(p)
    dists = _resolve_dists(kernel, dists)
    pts = np.asarray(index_set.points, dtype=int)
    d = index_set.d
    if kernel.d != d or len(dists) != d:
        raise DomainError("kernel, index set, and distributions must share one arity")

    n_cols = [int(pts[:, s].max()) for s in range(d)]
    supports = []
    total = 1
    for s, spec in enumerate(dists):
        if not isinstance(spec, FiniteDiscrete):
            raise DomainError("exact enumeration needs finite distributions")
        supports.append(len(spec.atoms))
        total *= supports[s] ** n_cols[s]
        if total > ENUM_GUARD:
            raise TooLargeError(
                f"enumeration would visit more than {ENUM_GUARD} outcomes"
            )

    # per coordinate: all assignments of cells to sample indices, with weights
    assign = []
    assign_prob = []
    for s in range(d):
        k, n_s = supports[s], n_cols[s]
        grids = np.meshgrid(*([np.arange(k)] * n_s), indexing="ij")
        rows = np.stack([g.reshape(-1) for g in grids], axis=1)  # (k^n_s, n_s)
        probs = np.prod(np.asarray(dists[s].probs)[rows], axis=1)
        assign.append(rows)
        assign_prob.append(probs)

    shape = [len(a) for a in assign]
    sums = np.zeros(shape)
    for q in pts:
        cell = []
        for s in range(d):
            sl = [1] * d
            sl[s] = shape[s]
            cell.append(assign[s][:, q[s] - 1].reshape(sl))
        sums += kernel.values[tuple(cell)]
    sums /= index_set.size

    prob = np.ones(shape)
    for s in range(d):
        sl = [1] * d
        sl[s] = shape[s]
        prob = prob * assign_prob[s].reshape(sl)
    return float(np.sum(prob * sums**p))


# ---------------------------------------------------------------------------
# lower bounds and sandwich ratios


def lower_bound_s1(kernel: GridKernel, p: float) -> float:
    """Norm of the single-point statistic: no upper bound can beat it.

    The one-point index set gives S_L = f(coordinates) exactly, so the
    supremum over index sets of |S_L|_p is at least the plain kernel norm.
    """
    if p < 2.0:
        raise DomainError(f"need p >= 2, got {p}")
    return lp_norm(kernel, p)


@dataclass(frozen=True)
class RatioCheck:
    """Sandwich ratios for one rank-1 kernel over an order grid."""

    label: str
    p_grid: tuple[float, ...]
    lower_ratio: tuple[float, ...]
    upper_ratio: tuple[float, ...]

    @property
    def lower_range(self) -> tuple[float, float]:
        return min(self.lower_ratio), max(self.lower_ratio)

    @property
    def upper_range(self) -> tuple[float, float]:
        return min(self.upper_ratio), max(self.upper_ratio)


def ratio_check(
    entries,
    p_grid,
    cfg: bell.BellEvalConfig = bell.DEFAULT_EVAL,
) -> tuple[RatioCheck, ...]:
    """Frame the moment machinery against the natural product norm.

    entries: (label, kernel, rank-1 representation) triples.  For each p,
    nu(p) is the product of the factor norms; the lower ratio compares
    the single-point statistic to nu (identically 1 for rank-1 kernels),
    the upper ratio compares the generic mean-bound constant at the
    worst box side to nu, which is the per-coordinate Poisson-moment
    factor and squares when the dimension doubles.
    """
    p_grid = tuple(float(p) for p in p_grid)
    if any(p < 2.0 for p in p_grid):
        raise DomainError("sandwich ratios need p >= 2")
    out = []
    for label, kernel, rep in entries:
        if not isinstance(rep, DegenerateRepresentation) or rep.degree != 1:
            raise DomainError(f"{label}: sandwich ratios need a rank-1 representation")
        if not rep.nonnegative:
            raise DomainError(f"{label}: factors must be nonnegative")
        lower = []
        upper = []
        for p in p_grid:
            norms = factor_lp_norms(rep, kernel.weights, p)
            nu = abs(float(rep.lam.reshape(-1)[0])) * math.prod(
                float(v[0]) for v in norms
            )
            lower.append(lp_norm(kernel, p) / nu)
            ratio = 1.0
            for s in range(kernel.d):
                g = rep.factors[s][0]
                w = kernel.weights[s]
                m1 = float(np.dot(w, np.abs(g)))
                mp = float(np.dot(w, np.abs(g) ** p))
                ratio *= theta_bound_iid(m1, mp, p, 1, cfg).v / mp ** (1.0 / p)
            upper.append(ratio)
        out.append(
            RatioCheck(
                label=label,
                p_grid=p_grid,
                lower_ratio=tuple(lower),
                upper_ratio=tuple(upper),
            )
        )
    return tuple(out)
