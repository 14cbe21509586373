"""FastAPI application: one POST endpoint per command under /v1.

Config validation failures surface as 422 with pydantic detail; model-
or range-level failures raised by the core layers surface as 400 with a
machine-readable {"error": {"kind", "message"}} body.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from . import handlers
from . import schemas as s


def create_app() -> FastAPI:
    app = FastAPI(title="vcselrc", version=__version__)

    @app.exception_handler(ValueError)
    async def _model_error(request: Request, exc: ValueError) -> JSONResponse:
        body = s.ErrorResponse(
            error=s.ErrorBody(kind=type(exc).__name__, message=str(exc))
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/characterize", response_model=s.CharacterizeResponse)
    def characterize(cfg: s.CharacterizeConfig) -> s.CharacterizeResponse:
        return handlers.characterize(cfg)

    @app.post("/v1/locking", response_model=s.LockingResponse)
    def locking(cfg: s.LockingConfig) -> s.LockingResponse:
        return handlers.locking(cfg)

    @app.post("/v1/calibrate", response_model=s.CalibrateResponse)
    def calibrate(cfg: s.CalibrateConfig) -> s.CalibrateResponse:
        return handlers.calibrate(cfg)

    @app.post("/v1/rc", response_model=s.RcResponse)
    def rc(cfg: s.RcConfig) -> s.RcResponse:
        return handlers.rc(cfg)

    @app.post("/v1/budget", response_model=s.BudgetResponse)
    def budget(cfg: s.BudgetConfig) -> s.BudgetResponse:
        return handlers.budget(cfg)

    return app
