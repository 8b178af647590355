"""FastAPI application wrapping the core package.

Run with: uvicorn zetagap.service.app:app

Package exceptions map onto HTTP codes: invalid inputs 400, capacity caps
413, numeric failures 500. Long experiment runs execute synchronously; size
the request (or the client timeout) accordingly.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import CapacityError, NumericalError, ValidationError
from . import handlers
from . import schemas as sm


def create_app() -> FastAPI:
    app = FastAPI(
        title="zetagap",
        description=(
            "Approximate spectral-gap certification for finite Markov chains, "
            "spike-and-slab posterior diagnostics, and a lazy Gibbs sampler "
            "with a mixing-time experiment harness."
        ),
    )

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        status = 413 if isinstance(exc, CapacityError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(NumericalError)
    async def _numerical(request: Request, exc: NumericalError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=sm.HealthResponse)
    def health():
        return handlers.health()

    @app.post("/chain/analyze", response_model=sm.GapReportModel)
    def chain_analyze(req: sm.ChainAnalyzeRequest):
        return handlers.analyze_chain(req)

    @app.post("/chain/tv-evolution", response_model=sm.TvEvolutionResponse)
    def chain_tv(req: sm.TvEvolutionRequest):
        return handlers.tv_evolution(req)

    @app.post("/mixture/analyze", response_model=sm.MixtureAnalyzeResponse)
    def mixture_analyze(req: sm.MixtureAnalyzeRequest):
        return handlers.analyze_mixture(req)

    @app.post("/model/enumerate", response_model=sm.EnumerateResponse)
    def model_enumerate(req: sm.EnumerateRequest):
        return handlers.enumerate_models(req)

    @app.post("/model/diagnostics", response_model=sm.DiagnosticsResponse)
    def model_diagnostics(req: sm.DiagnosticsRequest):
        return handlers.diagnostics(req)

    @app.post("/sampler/run", response_model=sm.SamplerRunResponse)
    def sampler_run(req: sm.SamplerRunRequest):
        return handlers.run_sampler_endpoint(req)

    @app.post("/verify", response_model=sm.VerifyResponse)
    def verify(req: sm.VerifyRequest):
        return handlers.verify(req)

    @app.post("/experiment/run", response_model=sm.ExperimentResponse)
    def experiment_run(req: sm.ExperimentRequest):
        return handlers.run_experiment(req)

    @app.post("/experiment/generate-instance", response_model=sm.InstanceResponse)
    def experiment_generate(req: sm.GenerateInstanceRequest):
        return handlers.generate_instance_endpoint(req)

    return app


app = create_app()
