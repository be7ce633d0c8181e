"""Request/response models and handlers; the FastAPI app wraps these.

The handlers are plain functions over pydantic models so the CLI can call
them in-process; the HTTP layer adds nothing but transport.  Input
problems raise :class:`InputError`, mapped to HTTP 422.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from . import hybrid, manifold, parsing, sdg, weil
from .selftest import SUITES, run_selftest

DEFAULT_TOL_CLOSED = 1e-6
DEFAULT_TOL_FD = 1e-3


class InputError(ValueError):
    """Invalid request content (maps to HTTP 422 / CLI exit 2)."""


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------

class AlgebraRequest(BaseModel):
    spec: str = Field(description="spec string, e.g. 'D_2(3)'")
    expr: str = Field(description="expression over +, *, ints, generators")


class TermModel(BaseModel):
    exp: list[int]
    coeff: Union[int, str, float]


class AlgebraResponse(BaseModel):
    spec: dict
    canonical: str
    augmentation: Union[int, str, float]
    terms: list[TermModel]


def run_algebra(req: AlgebraRequest) -> AlgebraResponse:
    try:
        spec = parsing.parse_spec_string(req.spec)
    except parsing.SpecStringError as err:
        raise InputError(str(err)) from err
    try:
        element = parsing.parse_expression(req.expr, spec)
    except parsing.ExprError as err:
        raise InputError(f"parse error: {err}") from err
    payload = weil.element_to_json(element)
    return AlgebraResponse(
        spec=payload["spec"],
        canonical=weil.to_string(element),
        augmentation=weil._coeff_to_json(element.augmentation()),
        terms=[TermModel(**t) for t in payload["terms"]],
    )


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

class CurvatureRequest(BaseModel):
    chart: Literal["euclidean", "sphere2", "sphere3"]
    dim: Optional[int] = None
    radius: Optional[float] = None
    points: list[list[float]] = Field(min_length=1)
    gamma: Literal["closed", "fd"] = "closed"
    tolerance: Optional[float] = None
    t1: Optional[list[float]] = None
    t2: Optional[list[float]] = None
    t3: Optional[list[float]] = None


class CurvatureRecordModel(BaseModel):
    point: list[float]
    synthetic: list[float]
    classical: list[float]
    abs_err: float
    rel_err: float


class CurvatureResponse(BaseModel):
    chart: str
    convention: str
    gamma: str
    tolerance: float
    max_rel_err: float
    passed: bool
    vectors: dict
    records: list[CurvatureRecordModel]


def build_chart(name: str, dim: Optional[int], radius: Optional[float]
                ) -> manifold.Chart:
    if name == "euclidean":
        if dim is None:
            raise InputError("euclidean chart needs dim")
    elif radius is None:
        raise InputError(f"{name} chart needs radius")
    try:
        if name == "euclidean":
            return manifold.catalog("euclidean", dim=dim)
        return manifold.catalog(name, radius=radius)
    except ValueError as err:   # unknown name, bad radius/dim
        raise InputError(str(err)) from err


def run_curvature(req: CurvatureRequest) -> CurvatureResponse:
    chart = build_chart(req.chart, req.dim, req.radius)
    work_chart = (manifold.finite_difference_variant(chart)
                  if req.gamma == "fd" else chart)
    tolerance = req.tolerance if req.tolerance is not None else (
        DEFAULT_TOL_FD if req.gamma == "fd" else DEFAULT_TOL_CLOSED)
    n = chart.dim
    for vec in (req.t1, req.t2, req.t3):
        if vec is not None and len(vec) != n:
            raise InputError(f"vectors must have {n} components")
    conn = sdg.SyntheticConnection(work_chart)
    records = []
    t1 = tuple(req.t1) if req.t1 else tuple(1.0 if i == 0 else 0.0 for i in range(n))
    t2 = tuple(req.t2) if req.t2 else tuple(
        1.0 if i == min(1, n - 1) else 0.0 for i in range(n))
    t3 = tuple(req.t3) if req.t3 else t1
    for point in req.points:
        if len(point) != n:
            raise InputError(f"point {point} must have {n} coordinates")
        try:
            chart.check_point(point)
            rec = sdg.compare_at_point(conn, point, t1, t2, t3,
                                       oracle_chart=chart)
        except manifold.ChartDomainError as err:
            raise InputError(str(err)) from err
        records.append(rec)
    max_rel = max(r.rel_err for r in records)
    return CurvatureResponse(
        chart=chart.describe(),
        convention=manifold.CONVENTION,
        gamma=req.gamma,
        tolerance=tolerance,
        max_rel_err=max_rel,
        passed=max_rel <= tolerance,
        vectors={"t1": list(t1), "t2": list(t2), "t3": list(t3)},
        records=[CurvatureRecordModel(**r.to_json()) for r in records],
    )


# ---------------------------------------------------------------------------
# Hybrid simulation
# ---------------------------------------------------------------------------

class SimulateRequest(BaseModel):
    h: float
    tau_min: float = -2.0
    tau_max: float = 2.0
    steps: int = 9
    order_k: int = 1
    m: int = 4
    profile: str = "abs"
    epsilon1: float = 0.1
    epsilon2: float = 0.1


class TimelineRowModel(BaseModel):
    tau: float
    rho: float
    regime: str
    curvature_scalar: Optional[float]
    curvature_weil: Optional[dict]
    side: str


class AtlasModel(BaseModel):
    patches: list[dict]
    overlap: list[float]
    single_global_chart: bool
    exotic_marker: bool
    citation: str


class SimulateResponse(BaseModel):
    timeline: list[TimelineRowModel]
    atlas: AtlasModel
    guarded_divisions: int


def run_simulate(req: SimulateRequest) -> SimulateResponse:
    try:
        cfg = hybrid.HybridConfig(
            h=req.h, tau_min=req.tau_min, tau_max=req.tau_max,
            steps=req.steps, order_k=req.order_k, m=req.m,
            shrink_profile=req.profile,
            epsilon1=req.epsilon1, epsilon2=req.epsilon2)
    except hybrid.HybridConfigError as err:
        raise InputError(str(err)) from err
    result = hybrid.simulate(cfg)
    return SimulateResponse(
        timeline=[TimelineRowModel(**hybrid.state_to_json(s))
                  for s in result.states],
        atlas=AtlasModel(**result.atlas.to_json()),
        guarded_divisions=result.guarded_divisions,
    )


# ---------------------------------------------------------------------------
# Selftest
# ---------------------------------------------------------------------------

class SelftestRequest(BaseModel):
    suites: Optional[list[str]] = None


class SuiteModel(BaseModel):
    name: str
    cases: int
    failures: list[str]
    passed: bool


class SelftestResponse(BaseModel):
    suites: list[SuiteModel]
    ok: bool


def run_selftest_request(req: SelftestRequest) -> SelftestResponse:
    if req.suites:
        unknown = [s for s in req.suites if s not in SUITES]
        if unknown:
            raise InputError(
                f"unknown suites {unknown}; known: {sorted(SUITES)}")
    results = run_selftest(req.suites)
    return SelftestResponse(
        suites=[SuiteModel(**r.to_json()) for r in results],
        ok=all(r.passed for r in results),
    )


# ---------------------------------------------------------------------------
# App
# ---------------------------------------------------------------------------

def create_app() -> FastAPI:
    app = FastAPI(title="weilgeo", version=__version__)

    def guard(fn, req):
        try:
            return fn(req)
        except InputError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/version")
    def version():
        return {"version": __version__}

    @app.post("/algebra", response_model=AlgebraResponse)
    def algebra(req: AlgebraRequest):
        return guard(run_algebra, req)

    @app.post("/curvature", response_model=CurvatureResponse)
    def curvature(req: CurvatureRequest):
        return guard(run_curvature, req)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        return guard(run_simulate, req)

    @app.post("/selftest", response_model=SelftestResponse)
    def selftest(req: SelftestRequest):
        return guard(run_selftest_request, req)

    return app


app = create_app()
