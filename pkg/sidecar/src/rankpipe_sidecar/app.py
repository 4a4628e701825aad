"""FastAPI application implementing the encoder wire protocol.

Endpoints: POST /embed, POST /score_pairs, GET /info. Response ordering
always matches request ordering; inference is serialized behind a lock
so concurrent requests cannot interleave model state.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .models import ModelRegistry


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    lang: str = "en"


class ScorePairsRequest(BaseModel):
    query: str = Field(min_length=1)
    sentences: list[str] = Field(min_length=1)


def create_app(registry: ModelRegistry) -> FastAPI:
    app = FastAPI(title="encoder sidecar")
    lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request,
                                 exc: RequestValidationError):
        # undecodable bodies are a client framing error (400); decodable
        # JSON with bad shapes/empty arrays is a validation error (422)
        if any(e.get("type") == "json_invalid" for e in exc.errors()):
            return JSONResponse(status_code=400,
                                content={"detail": "malformed JSON"})
        return JSONResponse(status_code=422,
                            content={"detail": exc.errors()})

    def require_ready():
        if not registry.ready:
            raise HTTPException(status_code=503,
                                detail="models are still loading")

    @app.get("/info")
    def info():
        require_ready()
        return registry.info()

    @app.post("/embed")
    def embed(request: EmbedRequest):
        require_ready()
        if registry.embed_model is None:
            raise HTTPException(status_code=404,
                                detail="no embedding model configured")
        if any(not t for t in request.texts):
            raise HTTPException(status_code=422,
                                detail="texts must be non-empty strings")
        with lock:
            vectors = registry.embed_model.embed(request.texts)
        return {"dim": registry.embed_model.dim, "vectors": vectors}

    @app.post("/score_pairs")
    def score_pairs(request: ScorePairsRequest):
        require_ready()
        if registry.pair_model is None:
            raise HTTPException(status_code=404,
                                detail="no pair model configured")
        if any(not s for s in request.sentences):
            raise HTTPException(status_code=422,
                                detail="sentences must be non-empty strings")
        with lock:
            scores = registry.pair_model.score(request.query,
                                               request.sentences)
        return {"scores": scores}

    return app
