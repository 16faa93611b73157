"""Request and response models for the HTTP service.

Requests are validated structurally here; semantic checks (moment
orderings, support constraints, enumeration guards) stay in the core
modules and surface as 400s.  Responses carry the same report dicts the
in-process pipelines produce, so a client sees identical bytes either way.
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator


class RepresentationModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    # the coefficient tensor has one axis per coordinate, so its nesting
    # depth depends on the kernel arity; validated structurally downstream
    lam: Any = Field(alias="lambda")
    factors: list[list[list[float]]]


class KernelModel(BaseModel):
    """Grid kernel payload: axes + weights, plus a value table and/or a
    factorized representation."""

    axes: list[list[float]]
    weights: list[list[float]]
    values: Any = None
    representation: RepresentationModel | None = None

    def as_dict(self) -> dict:
        data: dict = {"axes": self.axes, "weights": self.weights}
        if self.values is not None:
            data["values"] = self.values
        if self.representation is not None:
            data["representation"] = {
                "lambda": self.representation.lam,
                "factors": self.representation.factors,
            }
        return data


def _check_order_list(values: list[float]) -> list[float]:
    if not values:
        raise ValueError("p_list must not be empty")
    for p in values:
        if p < 2.0:
            raise ValueError("moment orders below 2 are not bounded by this route")
    return values


class BellRequest(BaseModel):
    p: float = Field(ge=0.0)
    beta: float = Field(gt=0.0)


class BellResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    b: float
    b_root: float
    g_upper: float
    h0_lower: float
    h_lower: float
    asym_upper: float | None
    root_over_beta: float | None


class SweepRequest(BaseModel):
    p_grid: list[float] = Field(min_length=1)
    beta_grid: list[float] = Field(min_length=1)
    slack: float = Field(default=1e-9, ge=0.0)


class SweepResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    rows: list[dict[str, Any]]
    violations: dict[str, int]
    root_over_beta_bracket: list[float] | None


class OneDimBoundRequest(BaseModel):
    p: float = Field(ge=2.0)
    m1: list[float] = Field(min_length=1)
    mp: list[float] = Field(min_length=1)


class OneDimBoundResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    n: int
    z: float
    v: float
    theta: float
    rosenthal: float
    triangle: float


class MultisumBoundRequest(BaseModel):
    kernel: KernelModel
    p_list: list[float] = Field(min_length=1)
    ns: list[int] | None = None
    points: list[list[int]] | None = None
    m_max: int = Field(default=8, ge=1)
    seed: int = 0
    expand: int = Field(default=0, ge=0)

    _orders = field_validator("p_list")(_check_order_list)


class MultisumBoundResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    bounds: list[dict[str, Any]]


class TailRequest(BaseModel):
    psi: dict[str, Any]
    y_grid: list[float] = Field(min_length=1)
    assumed_norm: float = Field(default=1.0, gt=0.0)


class TailResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    y: list[float]
    bound: list[float]


class ApproxRequest(BaseModel):
    kernel: KernelModel
    m_max: int = Field(ge=1)
    p: float = Field(default=2.0, ge=1.0)
    seed: int = 0
    iters: int = Field(default=20_000, ge=1)


class ApproxResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    sweep: list[dict[str, Any]]
    best: dict[str, Any]


class VerifyRequest(BaseModel):
    kernel: KernelModel
    p_list: list[float] = Field(default=[2.0, 3.0, 4.0], min_length=1)
    ns: list[int] | None = None
    points: list[list[int]] | None = None
    n_samples: int = Field(default=100_000, ge=1)
    seed: int = 0
    n_chunks: int = Field(default=64, ge=1)
    m_max: int = Field(default=8, ge=1)
    expand: int = Field(default=0, ge=0)
    y_grid: list[float] | None = None
    label: str = ""

    _orders = field_validator("p_list")(_check_order_list)


class VerifyResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    worst_status: str
    result: dict[str, Any]
    bound_provenance: dict[str, str]


class BatteryRequest(BaseModel):
    n_samples: int = Field(default=100_000, ge=1)
    seed: int = 2024
    p_list: list[float] = Field(default=[2.0, 3.0, 4.0], min_length=1)
    m_max: int = Field(default=4, ge=1)
    grid_n: int = Field(default=16, ge=2)
    n_chunks: int = Field(default=64, ge=1)
    include_scaled: bool = True
    only: list[str] | None = None

    _orders = field_validator("p_list")(_check_order_list)


class BatteryResponse(BaseModel):
    model_config = ConfigDict(extra="allow")

    cells: list[dict[str, Any]]
    summary: dict[str, Any]


class HealthResponse(BaseModel):
    status: str
    schema_version: str
