"""FastAPI application: /health, /tokenize, /logits, /toxicity, /comet.

Every response carries a schema version field ``v``; numeric ranges are
enforced by the response models, so an out-of-contract value can never leave
the server. Endpoints backed by an unconfigured model answer 503. The server
holds no per-request state beyond the loaded models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from .models import load_lm, load_metric, load_toxicity, tokenize

SCHEMA_VERSION = 1
NORMALIZATION_TOL = 1e-6


@dataclass
class BridgeConfig:
    lm: Optional[str] = None
    toxicity: Optional[str] = None
    metric: Optional[str] = None
    host: str = "127.0.0.1"
    port: int = 8321
    max_batch: int = 8


class LogitsRequest(BaseModel):
    prefix_tokens: Optional[list[str]] = None
    prefix_text: Optional[str] = None

    @model_validator(mode="after")
    def _one_of(self):
        if self.prefix_tokens is None and self.prefix_text is None:
            raise ValueError("provide prefix_tokens or prefix_text")
        return self


class LogitsResponse(BaseModel):
    v: int
    log_probs: list[float]
    vocab_hash: str


class TokenizeRequest(BaseModel):
    text: str


class TokenizeResponse(BaseModel):
    v: int
    tokens: list[str]
    vocab_hash: Optional[str] = None


class ToxicityRequest(BaseModel):
    text: str


class ToxicityResponse(BaseModel):
    v: int
    toxicity: float = Field(ge=0.0, le=1.0)


class CometRequest(BaseModel):
    source: str
    candidate: str
    reference: str


class CometResponse(BaseModel):
    v: int
    score: float = Field(allow_inf_nan=False)


class HealthResponse(BaseModel):
    v: int
    status: str
    endpoints: dict[str, bool]
    models: dict[str, Optional[str]]
    toxicity_mapping: Optional[str] = None


def create_app(config: BridgeConfig) -> FastAPI:
    app = FastAPI(title="toxsteer-bridge", version="0.1.0")
    lm = load_lm(config.lm)
    toxicity = load_toxicity(config.toxicity)
    metric = load_metric(config.metric)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(
            v=SCHEMA_VERSION,
            status="ok",
            endpoints={"logits": lm is not None,
                       "tokenize": True,
                       "toxicity": toxicity is not None,
                       "comet": metric is not None},
            models={"lm": config.lm, "toxicity": config.toxicity,
                    "metric": config.metric},
            toxicity_mapping=getattr(toxicity, "mapping_note", None),
        )

    @app.post("/tokenize", response_model=TokenizeResponse)
    def tokenize_text(request: TokenizeRequest):
        return TokenizeResponse(v=SCHEMA_VERSION,
                                tokens=tokenize(request.text),
                                vocab_hash=lm.hash if lm is not None else None)

    @app.post("/logits", response_model=LogitsResponse)
    def logits(request: LogitsRequest):
        if lm is None:
            raise HTTPException(status_code=503, detail="no language model configured")
        if request.prefix_tokens is not None:
            unknown = lm.validate(request.prefix_tokens)
            if unknown is not None:
                raise HTTPException(status_code=400,
                                    detail=f"unknown token: {unknown!r}")
            prefix = list(request.prefix_tokens)
        else:
            prefix = lm.encode(tokenize(request.prefix_text))
        log_probs = lm.log_probs(prefix)
        total = float(np.logaddexp.reduce(log_probs))
        if abs(total) > NORMALIZATION_TOL:
            raise HTTPException(status_code=500,
                                detail=f"distribution not normalized (logsumexp={total:.3e})")
        return LogitsResponse(v=SCHEMA_VERSION, log_probs=log_probs.tolist(),
                              vocab_hash=lm.hash)

    @app.post("/toxicity", response_model=ToxicityResponse)
    def toxicity_endpoint(request: ToxicityRequest):
        if toxicity is None:
            raise HTTPException(status_code=503, detail="no toxicity model configured")
        if not request.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        return ToxicityResponse(v=SCHEMA_VERSION, toxicity=toxicity.score(request.text))

    @app.post("/comet", response_model=CometResponse)
    def comet(request: CometRequest):
        if metric is None:
            raise HTTPException(status_code=503, detail="no semantic metric configured")
        score = metric.score(request.source, request.candidate, request.reference)
        return CometResponse(v=SCHEMA_VERSION, score=float(score))

    return app
