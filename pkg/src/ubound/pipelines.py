"""Report assembly: every command produces one JSON-ready dict.

Reports embed the schema version and the fully resolved configuration so
a bound can be audited from its artifact alone.  Serialization is kept
deterministic (sorted keys, fixed indentation, no timestamps): the same
run configuration must produce byte-identical files regardless of worker
count or wall clock.
"""

import json
import math

import numpy as np

from . import SCHEMA_VERSION, bell, gls, mc
from .bounds import IndexSet, nonrect_bound, w_bound
from .errors import DomainError, TooLargeError, UboundNumericError
from .kernels import GridKernel, PRESET_NAMES, degree_sweep, preset_kernel
from .onedim import MomentTable, rosenthal_bound, theta_bound, triangle_bound

BATTERY_WEIGHTINGS = ("uniform", "geometric", "linear")
BATTERY_SCALED = (("rank2_x5", "rank2", 5.0), ("expxy_x8", "expxy", 8.0))


def stable_json(report: dict) -> bytes:
    """Canonical bytes for a report; identical runs serialize identically."""
    return (json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()


def _base(command: str, config: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "command": command, "config": config}


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else str(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Poisson-moment commands


def _eval_defaults() -> dict:
    return {
        "rel_tol": bell.DEFAULT_EVAL.rel_tol,
        "max_terms": bell.DEFAULT_EVAL.max_terms,
    }


def run_bell(p: float, beta: float) -> dict:
    s = bell.sandwich(p, beta)
    report = _base("bell", {"p": p, "beta": beta, "eval": _eval_defaults()})
    report.update(
        {
            "b": bell.bell_value(p, beta),
            "b_root": s.b_root,
            "g_upper": s.g_upper,
            "h0_lower": s.h0_lower,
            "h_lower": s.h_lower,
            "asym_upper": s.asym_upper,
            "root_over_beta": s.root_over_beta,
        }
    )
    return report


def run_sweep(p_grid, beta_grid, slack: float = 1e-9) -> dict:
    """Envelope sandwich over a grid, with violation counts and the
    measured root/beta bracket on the large-beta regime."""
    p_grid = [float(p) for p in p_grid]
    beta_grid = [float(b) for b in beta_grid]
    rows = bell.sandwich_report(p_grid, beta_grid)
    violations = {"h0_above_b": 0, "root_above_g": 0, "root_above_asym": 0}
    ratios = []
    out_rows = []
    for s in rows:
        b_val = bell.bell_value(s.p, s.beta)
        if s.h0_lower > b_val * (1.0 + slack):
            violations["h0_above_b"] += 1
        if s.b_root > s.g_upper * (1.0 + slack):
            violations["root_above_g"] += 1
        if s.asym_upper is not None and s.b_root > s.asym_upper * (1.0 + slack):
            violations["root_above_asym"] += 1
        if s.root_over_beta is not None:
            ratios.append(s.root_over_beta)
        out_rows.append(
            {
                "p": s.p,
                "beta": s.beta,
                "b_root": s.b_root,
                "g_upper": s.g_upper,
                "h0_lower": s.h0_lower,
                "h_lower": s.h_lower,
                "asym_upper": s.asym_upper,
            }
        )
    report = _base(
        "sweep",
        {"p_grid": p_grid, "beta_grid": beta_grid, "slack": slack, "eval": _eval_defaults()},
    )
    report["rows"] = out_rows
    report["violations"] = violations
    report["root_over_beta_bracket"] = (
        [min(ratios), max(ratios)] if ratios else None
    )
    return report


def sweep_csv(report: dict) -> str:
    header = ("p", "beta", "b_root", "g_upper", "h0_lower", "h_lower", "asym_upper")
    return csv_text(header, [[r[h] for h in header] for r in report["rows"]])


# ---------------------------------------------------------------------------
# bound commands


def run_bound_onedim(p: float, m1, mp) -> dict:
    table = MomentTable(p=p, m1=tuple(float(v) for v in m1), mp=tuple(float(v) for v in mp))
    breakdown = theta_bound(table)
    report = _base("bound one-dim", {"p": p, "m1": list(table.m1), "mp": list(table.mp)})
    report.update(
        {
            "n": table.n,
            "z": breakdown.z,
            "v": breakdown.v,
            "theta": breakdown.theta,
            "rosenthal": rosenthal_bound(table),
            "triangle": triangle_bound(table),
        }
    )
    return report


def _breakdown_dict(b) -> dict:
    return {
        "p": b.p,
        "trivial": b.trivial,
        "factorizable": b.factorizable,
        "weighted_theta": b.weighted_theta,
        "w_composite": b.w_composite,
        "chosen": b.chosen,
        "provenance": b.provenance,
        "per_degree": [
            {"degree": t.degree, "theta_norm": t.theta_norm, "residual_lp": t.residual_lp}
            for t in b.per_degree
        ],
    }


def run_bound_multisum(
    kernel: GridKernel,
    index_set: IndexSet,
    p_list,
    m_max: int = 8,
    seed: int = 0,
    expand: int = 0,
) -> dict:
    """Per-order bounds for one index set; ragged sets report the
    coverage-scaled value next to the circumscribed-box breakdown."""
    p_list = [float(p) for p in p_list]
    report = _base(
        "bound multisum",
        {
            "p_list": p_list,
            "m_max": m_max,
            "seed": seed,
            "expand": expand,
            "l_size": index_set.size,
            "box_sides": list(index_set.box_sides),
            "is_box": index_set.is_box,
        },
    )
    entries = []
    for p in p_list:
        sweep = _safe_sweep(kernel, m_max, p, seed)
        box = w_bound(kernel, p, index_set.box_sides, m_max=m_max, seed=seed, sweep=sweep)
        entry = {"box_breakdown": _breakdown_dict(box)}
        if index_set.is_box:
            entry["chosen"] = box.chosen
        else:
            entry["chosen"] = nonrect_bound(
                index_set, kernel, p, m_max=m_max, seed=seed, expand=expand, sweep=sweep
            )
            entry["coverage_ratio"] = index_set.box_size / index_set.size
        entry["p"] = p
        entries.append(entry)
    report["bounds"] = entries
    return report


# ---------------------------------------------------------------------------
# tail command


def psi_from_dict(data: dict) -> gls.PsiSpec:
    family = data.get("family")
    if family == "power_log":
        return gls.PowerLogPsi(m=float(data["m"]), r=float(data.get("r", 0.0)))
    if family == "exp_power":
        return gls.ExpPowerPsi(c=float(data["c"]), beta=float(data["beta"]))
    if family == "finite_b":
        return gls.FiniteBPsi(
            b=float(data["b"]), theta=float(data.get("theta", 0.0)), c1=float(data.get("c1", 1.0))
        )
    if family == "constant":
        return gls.ConstantPsi(c=float(data["c"]))
    if family == "tabulated":
        return gls.TabulatedPsi(
            p_grid=np.asarray(data["p_grid"], dtype=float),
            values=np.asarray(data["values"], dtype=float),
        )
    if family == "product":
        return gls.combine_product([psi_from_dict(part) for part in data["parts"]])
    raise DomainError(f"unknown envelope family {family!r}")


def psi_to_dict(spec: gls.PsiSpec) -> dict:
    if isinstance(spec, gls.PowerLogPsi):
        return {"family": "power_log", "m": spec.m, "r": spec.r}
    if isinstance(spec, gls.ExpPowerPsi):
        return {"family": "exp_power", "c": spec.c, "beta": spec.beta}
    if isinstance(spec, gls.FiniteBPsi):
        return {"family": "finite_b", "b": spec.b, "theta": spec.theta, "c1": spec.c1}
    if isinstance(spec, gls.ConstantPsi):
        return {"family": "constant", "c": spec.c}
    if isinstance(spec, gls.TabulatedPsi):
        return {
            "family": "tabulated",
            "p_grid": spec.p_grid.tolist(),
            "values": spec.values.tolist(),
        }
    if isinstance(spec, gls.ProductPsi):
        return {"family": "product", "parts": [psi_to_dict(s) for s in spec.parts]}
    raise DomainError(f"cannot serialize {type(spec).__name__}")


def run_tail(spec: gls.PsiSpec, y_grid, assumed_norm: float = 1.0) -> dict:
    y = np.asarray([float(v) for v in y_grid])
    curve = gls.tail_upper(spec, y, assumed_norm=assumed_norm)
    report = _base(
        "tail",
        {
            "psi": psi_to_dict(spec),
            "assumed_norm": assumed_norm,
            "y_grid": y.tolist(),
            "p_max": gls.P_MAX_DEFAULT,
            "conjugate_grid_points": gls.CONJUGATE_GRID_POINTS,
        },
    )
    report["y"] = curve.y.tolist()
    report["bound"] = curve.bound.tolist()
    return report


def tail_csv(report: dict) -> str:
    return csv_text(("y", "bound"), zip(report["y"], report["bound"]))


# ---------------------------------------------------------------------------
# approx command


def run_approx(
    kernel: GridKernel, m_max: int, p: float = 2.0, seed: int = 0, iters: int = 20_000
) -> dict:
    report = _base(
        "approx", {"m_max": m_max, "p": p, "seed": seed, "iters": iters}
    )
    rows = []
    best = None
    for res in degree_sweep(kernel, m_max, p=p, seed=seed, iters=iters):
        rows.append(
            {
                "degree": res.representation.degree,
                "residual_l2": res.residual_l2,
                "residual_lp": res.residual_lp,
                "iterations": res.iterations,
                "converged": res.converged,
            }
        )
        if best is None or res.residual_l2 < best.residual_l2:
            best = res
    report["sweep"] = rows
    report["best"] = {
        "degree": best.representation.degree,
        "lam": best.representation.lam.tolist(),
        "factors": [f.tolist() for f in best.representation.factors],
        "residual_l2": best.residual_l2,
        "residual_lp": best.residual_lp,
    }
    return report


# ---------------------------------------------------------------------------
# verify command


def _safe_sweep(kernel, m_max, p, seed):
    try:
        return tuple(degree_sweep(kernel, m_max, p=p, seed=seed))
    except UboundNumericError:
        return ()


def _verify_report_dict(report: mc.VerifyReport) -> dict:
    return {
        "label": report.label,
        "n_samples": report.n_samples,
        "seed": report.seed,
        "n_chunks": report.n_chunks,
        "worst_status": report.worst_status,
        "moments": [
            {
                "p": float(c.p),
                "estimate": float(c.estimate),
                "stderr": float(c.stderr),
                "bound": None if c.bound is None else float(c.bound),
                "exact": None if c.exact is None else float(c.exact),
                "status": c.status,
            }
            for c in report.moments
        ],
        "tails": [
            {
                "y": float(c.y),
                "empirical": float(c.empirical),
                "ci_lo": float(c.ci_lo),
                "ci_hi": float(c.ci_hi),
                "exceedances": int(c.exceedances),
                "bound": None if c.bound is None else float(c.bound),
                "status": c.status,
            }
            for c in report.tails
        ],
    }


def _tail_bound_fn(p_list, bounds, y_grid):
    """Markov tail curve of the per-order bounds, as a lookup for the harness."""
    if not y_grid or not bounds:
        return None
    tab = gls.TabulatedPsi(
        p_grid=np.asarray(p_list, dtype=float),
        values=np.asarray([bounds[p] for p in p_list]),
    )
    curve = gls.tail_upper(tab, np.asarray(y_grid, dtype=float))
    table = dict(zip((float(y) for y in curve.y), (float(b) for b in curve.bound)))
    return lambda y: table[float(y)]


def _default_y_grid(kernel: GridKernel) -> tuple[float, ...]:
    top = float(kernel.values.max(initial=0.0))
    hi = max(top * 1.02, math.e + 2.0)
    return tuple(np.linspace(math.e, hi, 6))


def _try_exact(kernel, index_set, p_list):
    exacts = {}
    for p in p_list:
        if float(p).is_integer():
            try:
                exacts[p] = mc.exact_moment(kernel, index_set, int(p)) ** (1.0 / p)
            except TooLargeError:
                pass
    return exacts


def run_verify(
    kernel: GridKernel,
    index_set: IndexSet,
    p_list=(2.0, 3.0, 4.0),
    n_samples: int = 100_000,
    seed: int = 0,
    n_chunks: int = 64,
    m_max: int = 8,
    expand: int = 0,
    y_grid=None,
    label: str = "",
) -> dict:
    """Bound the statistic, then put the bounds on trial against MC and,
    where the enumeration guard allows, exact moments."""
    p_list = tuple(float(p) for p in p_list)
    bounds = {}
    provenance = {}
    for p in p_list:
        sweep = _safe_sweep(kernel, m_max, p, seed)
        if index_set.is_box:
            b = w_bound(kernel, p, index_set.box_sides, m_max=m_max, seed=seed, sweep=sweep)
            bounds[p], provenance[p] = b.chosen, b.provenance
        else:
            bounds[p] = nonrect_bound(
                index_set, kernel, p, m_max=m_max, seed=seed, expand=expand, sweep=sweep
            )
            provenance[p] = "nonrect"
    ys = tuple(float(y) for y in y_grid) if y_grid is not None else _default_y_grid(kernel)
    cfg = mc.McConfig(
        n_samples=n_samples, seed=seed, n_chunks=n_chunks, p_list=p_list, y_grid=ys
    )
    result = mc.verify_run(
        kernel,
        None,
        index_set,
        cfg,
        moment_bounds=bounds,
        tail_bound=_tail_bound_fn(p_list, bounds, ys),
        exact_moments=_try_exact(kernel, index_set, p_list),
        label=label,
    )
    report = _base(
        "verify",
        {
            "p_list": list(p_list),
            "n_samples": n_samples,
            "seed": seed,
            "n_chunks": n_chunks,
            "m_max": m_max,
            "expand": expand,
            "y_grid": list(ys),
            "l_size": index_set.size,
            "box_sides": list(index_set.box_sides),
            "is_box": index_set.is_box,
        },
    )
    report["bound_provenance"] = {str(p): provenance[p] for p in p_list}
    report["result"] = _verify_report_dict(result)
    report["worst_status"] = result.worst_status
    return report


def verify_tail_csv(report: dict) -> str:
    header = ("y", "empirical", "ci_lo", "ci_hi", "bound")
    rows = [
        (t["y"], t["empirical"], t["ci_lo"], t["ci_hi"], t["bound"])
        for t in report["result"]["tails"]
    ]
    return csv_text(header, rows)


# ---------------------------------------------------------------------------
# the dominance battery


def battery_index_sets() -> tuple[tuple[str, IndexSet], ...]:
    """Boxes small enough for enumeration, production-size boxes, and
    three ragged shapes with distinct coverage ratios."""
    diag = IndexSet(points=tuple((i, i) for i in range(1, 7)))
    lshape = IndexSet(
        points=tuple((i, j) for i in range(1, 7) for j in (1, 2))
        + tuple((i, j) for i in (1, 2) for j in range(3, 7))
    )
    checker = IndexSet(
        points=tuple(
            (i, j) for i in range(1, 6) for j in range(1, 6) if (i + j) % 2 == 0
        )
    )
    return (
        ("box2x2", IndexSet.box((2, 2))),
        ("box5x5", IndexSet.box((5, 5))),
        ("box20x20", IndexSet.box((20, 20))),
        ("diag6", diag),
        ("lshape", lshape),
        ("checker5", checker),
    )


def _battery_kernels(grid_n: int, include_scaled: bool, only=None):
    out = []
    for name in PRESET_NAMES:
        if only is not None and name not in only:
            continue
        for weighting in BATTERY_WEIGHTINGS:
            out.append((name, weighting, preset_kernel(name, grid_n, weighting)))
    if include_scaled:
        for label, name, scale in BATTERY_SCALED:
            if only is not None and label not in only:
                continue
            for weighting in BATTERY_WEIGHTINGS:
                base = preset_kernel(name, grid_n, weighting)
                scaled = GridKernel(
                    axes=base.axes, weights=base.weights, values=base.values * scale
                )
                out.append((label, weighting, scaled))
    return out


def run_battery(
    n_samples: int = 100_000,
    seed: int = 2024,
    p_list=(2.0, 3.0, 4.0),
    m_max: int = 4,
    grid_n: int = 16,
    n_chunks: int = 64,
    include_scaled: bool = True,
    only=None,
) -> dict:
    """Every preset kernel x marginal weighting x index-set shape, each
    cell's bounds tried against MC (and exact moments where feasible).

    only restricts the kernel list by name; the full battery runs by default.
    """
    p_list = tuple(float(p) for p in p_list)
    chosen = _battery_kernels(grid_n, include_scaled, only=only)
    report = _base(
        "verify --battery",
        {
            "n_samples": n_samples,
            "seed": seed,
            "p_list": list(p_list),
            "m_max": m_max,
            "grid_n": grid_n,
            "n_chunks": n_chunks,
            "include_scaled": include_scaled,
            "kernels": sorted({k for k, _, _ in chosen}),
            "weightings": list(BATTERY_WEIGHTINGS),
            "index_sets": [label for label, _ in battery_index_sets()],
            "sigma": mc.SIGMA,
            "min_tail_exceedances": mc.MIN_TAIL_EXCEEDANCES,
        },
    )
    cells = []
    counts = {"PASS": 0, "FAIL": 0, "INCONCLUSIVE": 0}
    for kname, weighting, kernel in chosen:
        sweeps = {p: _safe_sweep(kernel, m_max, p, seed) for p in p_list}
        ys = _default_y_grid(kernel)
        for l_label, index_set in battery_index_sets():
            bounds = {}
            provenance = {}
            for p in p_list:
                if index_set.is_box:
                    b = w_bound(
                        kernel, p, index_set.box_sides, m_max=m_max, seed=seed, sweep=sweeps[p]
                    )
                    bounds[p], provenance[p] = b.chosen, b.provenance
                else:
                    bounds[p] = nonrect_bound(
                        index_set, kernel, p, m_max=m_max, seed=seed, sweep=sweeps[p]
                    )
                    provenance[p] = "nonrect"
            cfg = mc.McConfig(
                n_samples=n_samples,
                seed=seed,
                n_chunks=n_chunks,
                p_list=p_list,
                y_grid=ys,
            )
            result = mc.verify_run(
                kernel,
                None,
                index_set,
                cfg,
                moment_bounds=bounds,
                tail_bound=_tail_bound_fn(p_list, bounds, ys),
                exact_moments=_try_exact(kernel, index_set, p_list),
                label=f"{kname}/{weighting}/{l_label}",
            )
            cell = _verify_report_dict(result)
            cell.update(
                {
                    "kernel": kname,
                    "weighting": weighting,
                    "index_set": l_label,
                    "bound_provenance": {str(p): provenance[p] for p in p_list},
                }
            )
            cells.append(cell)
            for c in result.moments:
                counts[c.status] += 1
            for c in result.tails:
                counts[c.status] += 1
    report["cells"] = cells
    report["summary"] = {
        "n_cells": len(cells),
        "statuses": counts,
        "worst_status": "FAIL"
        if counts["FAIL"]
        else ("INCONCLUSIVE" if counts["INCONCLUSIVE"] else "PASS"),
    }
    return report
