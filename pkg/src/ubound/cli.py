"""Command-line front end.

Every subcommand builds a RunConfig, and run(cfg) turns it into exactly
one report file (or stdout).  Exit codes are the contract CI scripts rely
on: 0 success, 1 validation error, 2 a verified bound violation (FAIL in
a report), 3 internal numeric failure.

By default everything runs in-process; --server posts the same payload to
a service instance and writes whatever report comes back, so both paths
produce byte-identical files for the same configuration.
"""

import argparse
import json
import sys
from dataclasses import dataclass

from . import pipelines
from .bounds import IndexSet
from .errors import UboundNumericError, UboundValidationError
from .kernels import load_kernel_file

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BOUND_FAIL = 2
EXIT_NUMERIC = 3


class CliError(UboundValidationError):
    """Bad command line; maps to the validation exit code."""


@dataclass
class RunConfig:
    """Fully resolved invocation; one config maps to one report file."""

    command: str
    subcommand: str = ""
    kernel: str | None = None
    l_box: tuple[int, ...] | None = None
    points: tuple[tuple[int, ...], ...] | None = None
    p: float | None = None
    beta: float | None = None
    p_list: tuple[float, ...] = ()
    p_grid: tuple[float, ...] = ()
    beta_grid: tuple[float, ...] = ()
    m1: tuple[float, ...] = ()
    mp: tuple[float, ...] = ()
    psi: dict | None = None
    y_grid: tuple[float, ...] | None = None
    assumed_norm: float = 1.0
    slack: float = 1e-9
    m_max: int = 8
    seed: int = 0
    n_samples: int = 100_000
    n_chunks: int = 64
    expand: int = 0
    iters: int = 20_000
    battery: bool = False
    battery_grid_n: int = 16
    battery_scaled: bool = True
    battery_only: tuple[str, ...] | None = None
    label: str = ""
    out: str | None = None
    format: str = "json"
    server: str | None = None
    host: str = "127.0.0.1"
    port: int = 8787

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise CliError(f"format must be json or csv, got {self.format!r}")
        floor = 0.0 if self.command in ("bell", "sweep") else 2.0
        for p in self.p_list:
            if p < floor:
                raise CliError(
                    f"moment order {p} below the minimum {floor} for {self.command}"
                )


def _parse_floats(text: str) -> tuple[float, ...]:
    """Comma list '2,3,4' or linspace 'lo:hi:count'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"range syntax is lo:hi:count, got {text!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise CliError("range count must be >= 1")
        if count == 1:
            return (lo,)
        step = (hi - lo) / (count - 1)
        return tuple(lo + i * step for i in range(count))
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise CliError(f"cannot parse number list {text!r}") from exc


def _parse_box(text: str) -> tuple[int, ...]:
    try:
        sides = tuple(int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise CliError(f"box syntax is like 10x10, got {text!r}") from exc
    if not sides or any(s < 1 for s in sides):
        raise CliError(f"box sides must be positive integers, got {text!r}")
    return sides


def _parse_json_arg(text: str, what: str):
    """Inline JSON, or @path to read it from a file."""
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError as exc:
            raise CliError(f"{what} file not found: {text[1:]}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"{what} file is not valid JSON: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{what} is neither JSON nor an @file reference: {exc}") from exc


def _index_set(cfg: RunConfig) -> IndexSet:
    if (cfg.l_box is None) == (cfg.points is None):
        raise CliError("give exactly one of --L (a box) or --points")
    if cfg.l_box is not None:
        return IndexSet.box(cfg.l_box)
    return IndexSet(points=cfg.points)


def _load_kernel(cfg: RunConfig):
    if cfg.kernel is None:
        raise CliError("--kernel is required for this command")
    try:
        kernel, _ = load_kernel_file(cfg.kernel)
    except FileNotFoundError as exc:
        raise CliError(f"kernel file not found: {cfg.kernel}") from exc
    return kernel


def _build_report(cfg: RunConfig) -> dict:
    if cfg.command == "bell":
        return pipelines.run_bell(cfg.p, cfg.beta)
    if cfg.command == "sweep":
        return pipelines.run_sweep(cfg.p_grid, cfg.beta_grid, slack=cfg.slack)
    if cfg.command == "bound":
        if cfg.subcommand == "one-dim":
            return pipelines.run_bound_onedim(cfg.p, cfg.m1, cfg.mp)
        return pipelines.run_bound_multisum(
            _load_kernel(cfg),
            _index_set(cfg),
            cfg.p_list,
            m_max=cfg.m_max,
            seed=cfg.seed,
            expand=cfg.expand,
        )
    if cfg.command == "tail":
        spec = pipelines.psi_from_dict(cfg.psi)
        return pipelines.run_tail(spec, cfg.y_grid, assumed_norm=cfg.assumed_norm)
    if cfg.command == "approx":
        return pipelines.run_approx(
            _load_kernel(cfg), cfg.m_max, p=cfg.p, seed=cfg.seed, iters=cfg.iters
        )
    if cfg.command == "verify":
        if cfg.battery:
            return pipelines.run_battery(
                n_samples=cfg.n_samples,
                seed=cfg.seed,
                p_list=cfg.p_list or (2.0, 3.0, 4.0),
                m_max=cfg.m_max,
                grid_n=cfg.battery_grid_n,
                n_chunks=cfg.n_chunks,
                include_scaled=cfg.battery_scaled,
                only=cfg.battery_only,
            )
        return pipelines.run_verify(
            _load_kernel(cfg),
            _index_set(cfg),
            p_list=cfg.p_list or (2.0, 3.0, 4.0),
            n_samples=cfg.n_samples,
            seed=cfg.seed,
            n_chunks=cfg.n_chunks,
            m_max=cfg.m_max,
            expand=cfg.expand,
            y_grid=cfg.y_grid,
            label=cfg.label,
        )
    raise CliError(f"unknown command {cfg.command!r}")


def _server_payload(cfg: RunConfig) -> tuple[str, dict]:
    if cfg.command == "bell":
        return "/bell", {"p": cfg.p, "beta": cfg.beta}
    if cfg.command == "sweep":
        return "/sweep", {
            "p_grid": list(cfg.p_grid),
            "beta_grid": list(cfg.beta_grid),
            "slack": cfg.slack,
        }
    if cfg.command == "bound" and cfg.subcommand == "one-dim":
        return "/bound/one-dim", {"p": cfg.p, "m1": list(cfg.m1), "mp": list(cfg.mp)}
    if cfg.command == "bound":
        payload = {
            "kernel": _kernel_payload(cfg),
            "p_list": list(cfg.p_list),
            "m_max": cfg.m_max,
            "seed": cfg.seed,
            "expand": cfg.expand,
        }
        payload.update(_index_payload(cfg))
        return "/bound/multisum", payload
    if cfg.command == "tail":
        return "/tail", {
            "psi": cfg.psi,
            "y_grid": list(cfg.y_grid),
            "assumed_norm": cfg.assumed_norm,
        }
    if cfg.command == "approx":
        return "/approx", {
            "kernel": _kernel_payload(cfg),
            "m_max": cfg.m_max,
            "p": cfg.p,
            "seed": cfg.seed,
            "iters": cfg.iters,
        }
    if cfg.command == "verify" and cfg.battery:
        payload = {
            "n_samples": cfg.n_samples,
            "seed": cfg.seed,
            "p_list": list(cfg.p_list or (2.0, 3.0, 4.0)),
            "m_max": cfg.m_max,
            "grid_n": cfg.battery_grid_n,
            "n_chunks": cfg.n_chunks,
            "include_scaled": cfg.battery_scaled,
        }
        if cfg.battery_only is not None:
            payload["only"] = list(cfg.battery_only)
        return "/verify/battery", payload
    if cfg.command == "verify":
        payload = {
            "kernel": _kernel_payload(cfg),
            "p_list": list(cfg.p_list or (2.0, 3.0, 4.0)),
            "n_samples": cfg.n_samples,
            "seed": cfg.seed,
            "n_chunks": cfg.n_chunks,
            "m_max": cfg.m_max,
            "expand": cfg.expand,
            "label": cfg.label,
        }
        if cfg.y_grid is not None:
            payload["y_grid"] = list(cfg.y_grid)
        payload.update(_index_payload(cfg))
        return "/verify", payload
    raise CliError(f"command {cfg.command!r} has no server route")


def _kernel_payload(cfg: RunConfig) -> dict:
    if cfg.kernel is None:
        raise CliError("--kernel is required for this command")
    try:
        with open(cfg.kernel, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"kernel file not found: {cfg.kernel}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"kernel file is not valid JSON: {exc}") from exc


def _index_payload(cfg: RunConfig) -> dict:
    if (cfg.l_box is None) == (cfg.points is None):
        raise CliError("give exactly one of --L (a box) or --points")
    if cfg.l_box is not None:
        return {"ns": list(cfg.l_box)}
    return {"points": [list(q) for q in cfg.points]}


def _post(cfg: RunConfig) -> dict:
    import httpx

    path, payload = _server_payload(cfg)
    url = cfg.server.rstrip("/") + path
    try:
        resp = httpx.post(url, json=payload, timeout=600.0)
    except httpx.HTTPError as exc:
        raise UboundNumericError(f"server request failed: {exc}") from exc
    if resp.status_code in (400, 422):
        raise CliError(f"server rejected the request: {resp.text}")
    if resp.status_code != 200:
        raise UboundNumericError(f"server error {resp.status_code}: {resp.text}")
    return resp.json()


def _render(cfg: RunConfig, report: dict) -> bytes:
    if cfg.format == "json":
        return pipelines.stable_json(report)
    if cfg.command == "sweep":
        return pipelines.sweep_csv(report).encode()
    if cfg.command == "tail":
        return pipelines.tail_csv(report).encode()
    if cfg.command == "verify" and not cfg.battery:
        return pipelines.verify_tail_csv(report).encode()
    raise CliError(f"csv output is not defined for {cfg.command!r} reports")


def _emit(cfg: RunConfig, data: bytes) -> None:
    if cfg.out is None:
        sys.stdout.write(data.decode())
        return
    with open(cfg.out, "wb") as fh:
        fh.write(data)


def run(cfg: RunConfig) -> int:
    """Execute one configuration; returns the process exit code."""
    try:
        if cfg.command == "serve":
            import uvicorn

            from .service.app import app

            uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
            return EXIT_OK
        report = _post(cfg) if cfg.server else _build_report(cfg)
        _emit(cfg, _render(cfg, report))
    except UboundValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UboundNumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    status = report.get("worst_status") or report.get("summary", {}).get("worst_status")
    if status == "FAIL":
        print("bound violation: at least one verified bound fell below the "
              "estimate by more than the sigma margin", file=sys.stderr)
        return EXIT_BOUND_FAIL
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags, which collides with the
    # bound-violation code; route everything through CliError instead.
    def error(self, message):
        raise CliError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--server", default=None, help="service URL; default runs in-process")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ubound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_bell = sub.add_parser("bell", help="moment sandwich at one (p, beta)")
    p_bell.add_argument("--p", type=float, required=True)
    p_bell.add_argument("--beta", type=float, required=True)
    _add_common(p_bell)

    p_sweep = sub.add_parser("sweep", help="sandwich over a (p, beta) grid")
    p_sweep.add_argument("--p-grid", required=True, help="comma list or lo:hi:count")
    p_sweep.add_argument("--beta-grid", required=True, help="comma list or lo:hi:count")
    p_sweep.add_argument("--slack", type=float, default=1e-9)
    _add_common(p_sweep)

    p_bound = sub.add_parser("bound", help="moment bounds")
    bound_sub = p_bound.add_subparsers(dest="subcommand", required=True)

    p_od = bound_sub.add_parser("one-dim", help="single normalized sum from a moment table")
    p_od.add_argument("--p", type=float, required=True)
    p_od.add_argument("--m1", required=True, help="comma list of first moments")
    p_od.add_argument("--mp", required=True, help="comma list of p-th moments")
    _add_common(p_od)

    p_ms = bound_sub.add_parser("multisum", help="multi-index sum over a kernel file")
    p_ms.add_argument("--kernel", required=True)
    p_ms.add_argument("--L", default=None, help="box sides like 10x10")
    p_ms.add_argument("--points", default=None, help="JSON list of index tuples, or @file")
    p_ms.add_argument("--p", required=True, help="comma list of moment orders")
    p_ms.add_argument("--m-max", type=int, default=8)
    p_ms.add_argument("--seed", type=int, default=0)
    p_ms.add_argument("--expand", type=int, default=0)
    _add_common(p_ms)

    p_tail = sub.add_parser("tail", help="tail curve from a moment envelope")
    p_tail.add_argument("--psi", required=True, help="envelope JSON, or @file")
    p_tail.add_argument("--y", required=True, help="comma list or lo:hi:count, y >= e")
    p_tail.add_argument("--assumed-norm", type=float, default=1.0)
    _add_common(p_tail)

    p_ap = sub.add_parser("approx", help="degree sweep of kernel factorizations")
    p_ap.add_argument("--kernel", required=True)
    p_ap.add_argument("--m-max", type=int, required=True)
    p_ap.add_argument("--p", type=float, default=2.0)
    p_ap.add_argument("--seed", type=int, default=0)
    p_ap.add_argument("--iters", type=int, default=20_000)
    _add_common(p_ap)

    p_ver = sub.add_parser("verify", help="bounds on trial against MC and enumeration")
    p_ver.add_argument("--kernel", default=None)
    p_ver.add_argument("--L", default=None, help="box sides like 10x10")
    p_ver.add_argument("--points", default=None, help="JSON list of index tuples, or @file")
    p_ver.add_argument("--p", default="2,3,4", help="comma list of moment orders")
    p_ver.add_argument("--n", type=int, default=100_000, help="MC sample count")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--chunks", type=int, default=64)
    p_ver.add_argument("--m-max", type=int, default=8)
    p_ver.add_argument("--expand", type=int, default=0)
    p_ver.add_argument("--y", default=None, help="tail grid; default spans the kernel range")
    p_ver.add_argument("--label", default="")
    p_ver.add_argument("--battery", action="store_true",
                       help="run the full preset battery instead of one kernel")
    p_ver.add_argument("--grid-n", type=int, default=16, help="battery grid side")
    p_ver.add_argument("--no-scaled", action="store_true",
                       help="battery: drop the rescaled kernels")
    p_ver.add_argument("--only", default=None,
                       help="battery: comma list of kernel names to keep")
    _add_common(p_ver)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cmd = args.command
    if cmd == "bell":
        return RunConfig(command="bell", p=args.p, beta=args.beta,
                         out=args.out, format=args.format, server=args.server)
    if cmd == "sweep":
        return RunConfig(command="sweep", p_grid=_parse_floats(args.p_grid),
                         beta_grid=_parse_floats(args.beta_grid), slack=args.slack,
                         out=args.out, format=args.format, server=args.server)
    if cmd == "bound" and args.subcommand == "one-dim":
        return RunConfig(command="bound", subcommand="one-dim", p=args.p,
                         p_list=(args.p,), m1=_parse_floats(args.m1),
                         mp=_parse_floats(args.mp),
                         out=args.out, format=args.format, server=args.server)
    if cmd == "bound":
        return RunConfig(command="bound", subcommand="multisum", kernel=args.kernel,
                         l_box=_parse_box(args.L) if args.L else None,
                         points=_parse_points(args.points),
                         p_list=_parse_floats(args.p), m_max=args.m_max,
                         seed=args.seed, expand=args.expand,
                         out=args.out, format=args.format, server=args.server)
    if cmd == "tail":
        return RunConfig(command="tail", psi=_parse_json_arg(args.psi, "psi"),
                         y_grid=_parse_floats(args.y), assumed_norm=args.assumed_norm,
                         out=args.out, format=args.format, server=args.server)
    if cmd == "approx":
        return RunConfig(command="approx", kernel=args.kernel, m_max=args.m_max,
                         p=args.p, seed=args.seed, iters=args.iters,
                         out=args.out, format=args.format, server=args.server)
    if cmd == "verify":
        return RunConfig(command="verify", kernel=args.kernel,
                         l_box=_parse_box(args.L) if args.L else None,
                         points=_parse_points(args.points),
                         p_list=_parse_floats(args.p), n_samples=args.n,
                         seed=args.seed, n_chunks=args.chunks, m_max=args.m_max,
                         expand=args.expand,
                         y_grid=_parse_floats(args.y) if args.y else None,
                         label=args.label, battery=args.battery,
                         battery_grid_n=args.grid_n,
                         battery_scaled=not args.no_scaled,
                         battery_only=tuple(args.only.split(",")) if args.only else None,
                         out=args.out, format=args.format, server=args.server)
    if cmd == "serve":
        return RunConfig(command="serve", host=args.host, port=args.port)
    raise CliError(f"unknown command {cmd!r}")


def _parse_points(text: str | None):
    if text is None:
        return None
    data = _parse_json_arg(text, "points")
    try:
        return tuple(tuple(int(c) for c in q) for q in data)
    except (TypeError, ValueError) as exc:
        raise CliError("points must be a JSON list of integer index tuples") from exc


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from_args(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg)
