"""FastAPI application implementing the variation wire protocol.

POST /v1/variations takes the generation request, answers
{"images_b64": [...], "seeds": [...]}; GET /v1/health reports the model and
mode. Errors always carry a JSON body of the shape {"error": "..."}:
400 for malformed requests, 422 for out-of-range parameters, 503 while the
real pipeline is loading or unavailable.
"""

from __future__ import annotations

import base64
import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .models import HealthResponse, VariationRequest, VariationResponse, MAX_SEED
from .pipeline import DiffusionWorker, PipelineUnavailable
from .stub import noise_image

log = logging.getLogger(__name__)

# constraint violations keep 422; anything structurally wrong is 400
_RANGE_ERRORS = {
    "greater_than",
    "greater_than_equal",
    "less_than",
    "less_than_equal",
    "multiple_of",
}


def create_app(
    mode: str = "stub",
    checkpoint: str | None = None,
    device: str = "cpu",
) -> FastAPI:
    if mode not in ("stub", "real"):
        raise ValueError("mode must be 'stub' or 'real'")
    if mode == "real" and not checkpoint:
        raise ValueError("real mode needs a checkpoint path or identifier")

    app = FastAPI(title="genservice", version="0.1.0")
    worker = DiffusionWorker(checkpoint, device) if mode == "real" else None

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        status = 422 if all(e["type"] in _RANGE_ERRORS for e in errors) else 400
        detail = "; ".join(
            f"{'.'.join(str(p) for p in e['loc'][1:]) or 'body'}: {e['msg']}"
            for e in errors
        )
        return JSONResponse(status_code=status, content={"error": detail})

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        log.exception("unhandled error")
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.get("/v1/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(model=checkpoint or "stub-noise", mode=mode)

    @app.post("/v1/variations", response_model=VariationResponse)
    async def variations(request: VariationRequest):
        seeds = [(request.seed + j) & MAX_SEED for j in range(request.count)]
        if worker is None:
            images = [
                noise_image(seed, request.width, request.height) for seed in seeds
            ]
        else:
            worker.load()
            try:
                images = worker.generate(
                    init_image=request.init_image(),
                    prompt=request.prompt,
                    seed=request.seed,
                    count=request.count,
                    strength=request.strength,
                    guidance_scale=request.guidance_scale,
                    width=request.width,
                    height=request.height,
                )
            except PipelineUnavailable as exc:
                return JSONResponse(status_code=503, content={"error": str(exc)})
            except MemoryError:
                return JSONResponse(status_code=503, content={"error": "out of memory"})
        return VariationResponse(
            images_b64=[base64.b64encode(img).decode("ascii") for img in images],
            seeds=seeds,
        )

    return app
