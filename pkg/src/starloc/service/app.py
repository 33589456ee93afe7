"""FastAPI wrapper around the sweep drivers."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import StarlocError
from ..experiments import (
    ScenarioConfig,
    SweepRecord,
    evaluate_point,
    run_design_compare,
    run_heatmap,
    run_snr_sweep,
)
from .schemas import HealthResponse, PointRequest, SweepResponse


def create_app() -> FastAPI:
    app = FastAPI(title="starloc", version=__version__)

    @app.exception_handler(StarlocError)
    async def domain_error(request: Request, exc: StarlocError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/v1/sweeps/snr", response_model=SweepResponse)
    def snr_sweep(config: ScenarioConfig) -> SweepResponse:
        return SweepResponse(records=run_snr_sweep(config))

    @app.post("/v1/sweeps/heatmap", response_model=SweepResponse)
    def heatmap(config: ScenarioConfig) -> SweepResponse:
        return SweepResponse(records=run_heatmap(config))

    @app.post("/v1/sweeps/design-compare", response_model=SweepResponse)
    def design_compare(config: ScenarioConfig) -> SweepResponse:
        return SweepResponse(records=run_design_compare(config))

    @app.post("/v1/crlb", response_model=SweepRecord)
    def point(request: PointRequest) -> SweepRecord:
        return evaluate_point(
            request.config,
            snr_db=request.snr_db,
            eps1=request.eps1,
            eta1=request.eta1,
            design=request.design,
            seed=request.seed,
        )

    return app


app = create_app()
