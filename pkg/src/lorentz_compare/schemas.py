"""Pydantic models for spacetime spec files and service requests/responses.

Every model forbids unknown keys, so a typo in a config file is a usage
error instead of a silently ignored setting.
"""

from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# spacetime spec files


class ModelWarp(Strict):
    kind: Literal["model"] = "model"
    kappa: float
    beta: float


class Term(Strict):
    """One summand of an expression warp: amplitude * form(rate * t + phase).

    ``cubic_plus`` is amplitude * max(t - phase, 0)^3, a C^2 kink used to
    build profiles that leave a model at a given time.
    """

    form: Literal["cos", "sin", "cosh", "sinh", "exp", "affine", "cubic_plus"]
    amplitude: float = 1.0
    rate: float = 1.0
    phase: float = 0.0


class ExpressionWarp(Strict):
    kind: Literal["expression"] = "expression"
    terms: List[Term] = Field(min_length=1)


class SampledWarp(Strict):
    kind: Literal["samples"] = "samples"
    t: List[float] = Field(min_length=4)
    f: List[float] = Field(min_length=4)

    @model_validator(mode="after")
    def _same_length(self):
        if len(self.t) != len(self.f):
            raise ValueError("t and f samples must have equal length")
        if any(b <= a for a, b in zip(self.t, self.t[1:])):
            raise ValueError("sample times must be strictly increasing")
        return self


class FlatWarp(Strict):
    kind: Literal["flat"] = "flat"


Warp = Union[ModelWarp, ExpressionWarp, SampledWarp, FlatWarp]


class SliceSpec(Strict):
    kind: Literal["slice"] = "slice"
    t0: float = 0.0


class GraphSpec(Strict):
    """u(x) = t0 + linear . x + 0.5 * sum_i quadratic_i x_i^2."""

    kind: Literal["graph"] = "graph"
    t0: float = 0.0
    linear: List[float] = Field(default_factory=list)
    quadratic: List[float] = Field(default_factory=list)


SigmaSpec = Union[SliceSpec, GraphSpec]


class SpacetimeSpec(Strict):
    schema_version: int = SCHEMA_VERSION
    n: int = Field(ge=2)
    fiber_curvature: Optional[Literal[-1, 0, 1]] = None
    warp: Warp = Field(discriminator="kind")
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    sigma: SigmaSpec = Field(default_factory=SliceSpec, discriminator="kind")
    label: str = ""

    @field_validator("schema_version")
    @classmethod
    def _version(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v}; expected {SCHEMA_VERSION}")
        return v


# requests


class TableRequest(Strict):
    kappa: float
    beta: float
    n: int = Field(ge=2)


class RiccatiRequest(Strict):
    kappa: float
    dim: int = Field(default=1, ge=1)
    mode: Literal["scalar", "matrix"] = "scalar"
    t0: Optional[float] = None
    s0: Optional[float] = None
    direction: Literal["forward", "backward"] = "forward"
    horizon: float = Field(default=10.0, gt=0)
    eps0: float = Field(default=0.0, ge=0)
    t_start: float = Field(default=1e-4, gt=0)
    perturbations: int = Field(default=0, ge=0)
    support: List[float] = Field(default_factory=lambda: [0.5, 1.5])
    seed: int = 0
    tol: float = Field(default=1e-6, gt=0)

    @model_validator(mode="after")
    def _init(self):
        if self.mode == "scalar" and (self.t0 is None or self.s0 is None):
            raise ValueError("scalar mode needs t0 and s0")
        if len(self.support) != 2 or not self.support[0] < self.support[1]:
            raise ValueError("support must be [lo, hi] with lo < hi")
        return self


class GeodesicRequest(Strict):
    spec: SpacetimeSpec
    p: List[float]
    v: List[float]
    span: float = Field(gt=0)
    samples: int = Field(default=201, ge=2)


class TauRequest(Strict):
    spec: SpacetimeSpec
    p: Optional[List[float]] = None
    q: List[float]
    to_sigma: bool = False
    seed: int = 0

    @model_validator(mode="after")
    def _target(self):
        if self.p is None and not self.to_sigma:
            raise ValueError("give p, or set to_sigma to measure from the spec's hypersurface")
        return self


class BusemannRequest(Strict):
    spec: SpacetimeSpec
    foot: List[float]
    x: List[float]
    schedule: Optional[List[float]] = None
    asymptote: bool = False
    tol: float = Field(default=1e-8, gt=0)


class CompareRequest(Strict):
    spec: SpacetimeSpec
    kappa: float
    beta: float
    radius: float = Field(default=1.0, gt=0)
    t_grid: Optional[List[float]] = None
    seed: int = 0
    tol: float = Field(default=1e-8, gt=0)
    flat_tol: float = Field(default=1e-10, gt=0)
    iso_tol: float = Field(default=1e-6, gt=0)


class SplitRequest(Strict):
    spec: SpacetimeSpec
    kappa: Optional[float] = None
    beta: Optional[float] = None
    t_grid: Optional[List[float]] = None
    fiber_samples: Optional[List[List[float]]] = None
    tol: float = Field(default=1e-6, gt=0)
    iso_tol: float = Field(default=1e-6, gt=0)


class CounterexampleRequest(Strict):
    kappa: float
    beta: float
    beta_tildes: List[float] = Field(min_length=2)
    n: int = Field(ge=2)
    t_eval: float = 2.0
    seed: int = 0


# request fields that --tol key=value may override
TOLERANCE_FIELDS: Dict[str, tuple] = {
    "table": (),
    "riccati": ("tol",),
    "geodesic": (),
    "tau": (),
    "busemann": ("tol",),
    "compare": ("tol", "flat_tol", "iso_tol"),
    "split": ("tol", "iso_tol"),
    "counterexample": (),
}

REQUESTS: Dict[str, type] = {
    "table": TableRequest,
    "riccati": RiccatiRequest,
    "geodesic": GeodesicRequest,
    "tau": TauRequest,
    "busemann": BusemannRequest,
    "compare": CompareRequest,
    "split": SplitRequest,
    "counterexample": CounterexampleRequest,
}


class CommandResponse(Strict):
    command: str
    violation: bool = False
    dry_run: bool = False
    result: Dict[str, Any]
    csv: Optional[str] = None
    failing_sample: Optional[str] = None


# CLI run configuration files


class OutputSpec(Strict):
    format: Literal["json", "csv"] = "json"
    path: Optional[str] = None


class RunConfig(Strict):
    """A JSON run configuration; command-line flags override its values.

    ``params`` holds the request fields of the command (for example
    ``{"p": [0, 0], "q": [3, 0]}`` for tau) and is validated strictly
    against that command's request model.
    """

    schema_version: int = SCHEMA_VERSION
    command: Optional[Literal["table", "riccati", "geodesic", "tau", "busemann", "compare", "split",
                              "counterexample"]] = None
    spec_path: Optional[str] = None
    seed: Optional[int] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output: OutputSpec = Field(default_factory=OutputSpec)
    jobs: int = Field(default=1, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("schema_version")
    @classmethod
    def _version(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v}; expected {SCHEMA_VERSION}")
        return v


class Health(Strict):
    status: Literal["ok"] = "ok"
    version: str
