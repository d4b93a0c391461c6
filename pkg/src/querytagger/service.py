"""Real-time tagging service: a FastAPI app around one immutable model.

The model is loaded once when the app is created; request handling is a
pure read, so concurrent requests are independent and any request order
produces identical per-request responses.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .core import entity_surfaces
from .model_io import ModelArtifact, load_model
from .net import ModelParams
from .preprocess import EmptyQueryError, normalize_query
from .train import predict

DEFAULT_TOKEN_CAP = 32


class TagRequest(BaseModel):
    query: str


class TagResponse(BaseModel):
    query: str
    tokens: list[str]
    labels: list[str]
    brand: list[str]
    product: list[str]


class HealthResponse(BaseModel):
    status: str
    format_version: int
    catalog_fingerprint: str


def tag_raw_query(
    params: ModelParams, raw: str, token_cap: int = DEFAULT_TOKEN_CAP
) -> dict:
    """Normalize, truncate to the token cap, tag, and decode entities."""
    tokens = normalize_query(raw)[:token_cap]
    tagged = predict(params, tokens)
    brand, product = entity_surfaces(tagged.tokens, tagged.labels)
    return {
        "query": raw,
        "tokens": list(tagged.tokens),
        "labels": [lab.value for lab in tagged.labels],
        "brand": brand,
        "product": product,
    }


def create_app(
    model: str | Path | ModelArtifact, token_cap: int = DEFAULT_TOKEN_CAP
) -> FastAPI:
    artifact = model if isinstance(model, ModelArtifact) else load_model(model)
    app = FastAPI(title="querytagger", description="Search-query entity tagging")

    @app.post("/tag", response_model=TagResponse)
    def tag(request: TagRequest) -> TagResponse:
        try:
            return TagResponse(**tag_raw_query(artifact.params, request.query, token_cap))
        except EmptyQueryError:
            raise HTTPException(status_code=400, detail="empty query") from None

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            format_version=artifact.version,
            catalog_fingerprint=artifact.fingerprint,
        )

    return app
