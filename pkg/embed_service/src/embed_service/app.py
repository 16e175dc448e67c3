"""HTTP surface: POST /embed, GET /info, GET /health.

The service is stateless per request. Backends are resolved at app creation
from the config; inference here is pure arithmetic, so requests can run
concurrently without locking.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .backends import AudioDecodeError
from .config import ServiceConfig


class EmbedRequest(BaseModel):
    modality: Literal["text", "audio"]
    payloads: list[str] = Field(min_length=1)
    model: str


class EmbedResponse(BaseModel):
    model: str
    version: str
    dim: int
    vectors: list[list[float]]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    backends = config.backends()
    app = FastAPI(title="embed-service", version="0.1.0")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/info")
    def info():
        return {
            "models": [
                {
                    "name": backend.name,
                    "version": backend.version,
                    "dim": backend.dim,
                    "modalities": list(backend.modalities),
                }
                for backend in backends.values()
            ],
            "max_batch": config.max_batch,
        }

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest):
        backend = backends.get(request.model)
        if backend is None:
            raise HTTPException(
                status_code=404,
                detail=f"unknown model tag {request.model!r}; served: {sorted(backends)}",
            )
        if len(request.payloads) > config.max_batch:
            raise HTTPException(
                status_code=400,
                detail=f"batch of {len(request.payloads)} exceeds max_batch {config.max_batch}",
            )
        try:
            vectors = backend.embed(request.modality, request.payloads)
        except AudioDecodeError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return EmbedResponse(
            model=backend.name,
            version=backend.version,
            dim=backend.dim,
            vectors=[[float(x) for x in row] for row in vectors],
        )

    return app
