"""HTTP front end: every pipeline behind one POST endpoint.

Validation failures (ours or pydantic's) come back as 400/422 and numeric
failures as 500, mirroring the CLI exit codes 1 and 3.  The response body
is always the full report dict, so saving it reproduces the file the
in-process CLI would have written.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import SCHEMA_VERSION, pipelines
from ..bounds import IndexSet
from ..errors import UboundNumericError, UboundValidationError
from ..kernels import kernel_from_dict
from . import schemas

app = FastAPI(title="ubound", version=SCHEMA_VERSION.split("/")[-1])


@app.exception_handler(UboundValidationError)
async def _validation_handler(request: Request, exc: UboundValidationError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(UboundNumericError)
async def _numeric_handler(request: Request, exc: UboundNumericError):
    return JSONResponse(status_code=500, content={"detail": str(exc)})


def _index_set(ns, points) -> IndexSet:
    if (ns is None) == (points is None):
        raise UboundValidationError("give exactly one of ns (a box) or points")
    if ns is not None:
        return IndexSet.box(tuple(ns))
    return IndexSet(points=tuple(tuple(q) for q in points))


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> dict:
    return {"status": "ok", "schema_version": SCHEMA_VERSION}


@app.post("/bell", response_model=schemas.BellResponse)
def bell_endpoint(req: schemas.BellRequest) -> dict:
    return pipelines.run_bell(req.p, req.beta)


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep_endpoint(req: schemas.SweepRequest) -> dict:
    return pipelines.run_sweep(req.p_grid, req.beta_grid, slack=req.slack)


@app.post("/bound/one-dim", response_model=schemas.OneDimBoundResponse)
def bound_onedim_endpoint(req: schemas.OneDimBoundRequest) -> dict:
    return pipelines.run_bound_onedim(req.p, req.m1, req.mp)


@app.post("/bound/multisum", response_model=schemas.MultisumBoundResponse)
def bound_multisum_endpoint(req: schemas.MultisumBoundRequest) -> dict:
    kernel, _ = kernel_from_dict(req.kernel.as_dict())
    return pipelines.run_bound_multisum(
        kernel,
        _index_set(req.ns, req.points),
        req.p_list,
        m_max=req.m_max,
        seed=req.seed,
        expand=req.expand,
    )


@app.post("/tail", response_model=schemas.TailResponse)
def tail_endpoint(req: schemas.TailRequest) -> dict:
    spec = pipelines.psi_from_dict(req.psi)
    return pipelines.run_tail(spec, req.y_grid, assumed_norm=req.assumed_norm)


@app.post("/approx", response_model=schemas.ApproxResponse)
def approx_endpoint(req: schemas.ApproxRequest) -> dict:
    kernel, _ = kernel_from_dict(req.kernel.as_dict())
    return pipelines.run_approx(
        kernel, req.m_max, p=req.p, seed=req.seed, iters=req.iters
    )


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify_endpoint(req: schemas.VerifyRequest) -> dict:
    kernel, _ = kernel_from_dict(req.kernel.as_dict())
    return pipelines.run_verify(
        kernel,
        _index_set(req.ns, req.points),
        p_list=req.p_list,
        n_samples=req.n_samples,
        seed=req.seed,
        n_chunks=req.n_chunks,
        m_max=req.m_max,
        expand=req.expand,
        y_grid=req.y_grid,
        label=req.label,
    )


@app.post("/verify/battery", response_model=schemas.BatteryResponse)
def battery_endpoint(req: schemas.BatteryRequest) -> dict:
    return pipelines.run_battery(
        n_samples=req.n_samples,
        seed=req.seed,
        p_list=req.p_list,
        m_max=req.m_max,
        grid_n=req.grid_n,
        n_chunks=req.n_chunks,
        include_scaled=req.include_scaled,
        only=tuple(req.only) if req.only is not None else None,
    )
