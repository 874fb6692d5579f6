"""HTTP service exposing the provider wire contract.

Generation speaks the chat-completions shape; each scoring capability has
its own POST endpoint taking {"texts": [...]}. Requests are handled
concurrently (sync handlers on the framework's thread pool) and every
response depends only on its own request.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .backends import (BackendLoadError, build_embedder, build_emotions,
                       build_perplexity, build_toxicity)
from .config import AdapterConfig
from .lexicons import EMOTION_LABELS
from .textgen import TextGenerator


@dataclass
class Backends:
    generator: TextGenerator
    embedder: object
    emotions: object
    toxicity: object
    perplexity: object

    def model_ids(self) -> dict[str, str]:
        return {
            "generator": self.generator.meta.get("model_id", "tiny-gru"),
            "embedder": self.embedder.model_id,
            "emotions": self.emotions.model_id,
            "toxicity": self.toxicity.model_id,
            "perplexity": self.perplexity.model_id,
        }


def load_backends(cfg: AdapterConfig) -> Backends:
    """Load every capability or abort naming the one that failed."""
    if cfg.generator == "tiny-base":
        generator = TextGenerator.train_base(seed=cfg.seed)
        generator.meta["model_id"] = "tiny-base"
    else:
        try:
            generator = TextGenerator.load(cfg.generator)
        except (OSError, KeyError, ValueError) as exc:
            raise BackendLoadError(
                f"generator model {cfg.generator!r}: {exc}") from None
        generator.meta["model_id"] = cfg.generator
    return Backends(
        generator=generator,
        embedder=build_embedder(cfg.embedder),
        emotions=build_emotions(cfg.emotions),
        toxicity=build_toxicity(cfg.toxicity),
        perplexity=build_perplexity(cfg.perplexity),
    )


class ChatMessage(BaseModel):
    role: str
    content: str


class ChatRequest(BaseModel):
    model: str = "default"
    messages: list[ChatMessage]
    temperature: float = Field(default=1.0, ge=0.0)
    n: int = Field(default=1, ge=1, le=512)
    max_tokens: int = Field(default=60, ge=1, le=2048)


class TextsRequest(BaseModel):
    texts: list[str]


def _chunked(texts: Sequence[str], size: int):
    for start in range(0, len(texts), size):
        yield texts[start:start + size]


def create_app(cfg: AdapterConfig | None = None,
               backends: Backends | None = None) -> FastAPI:
    cfg = cfg or AdapterConfig()
    backends = backends or load_backends(cfg)
    app = FastAPI(title="model adapter")

    def score(fn, texts: list[str]) -> list:
        out: list = []
        for chunk in _chunked(texts, cfg.batch_size):
            out.extend(fn(chunk))
        return out

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "models": backends.model_ids(),
                "emotion_labels": list(EMOTION_LABELS)}

    @app.post("/v1/chat/completions")
    def chat(req: ChatRequest) -> dict:
        prompt = ""
        for message in reversed(req.messages):
            if message.role == "user":
                prompt = message.content
                break
        if not prompt:
            raise HTTPException(status_code=400,
                                detail="no user message with content")
        completions = backends.generator.generate(
            prompt, temperature=req.temperature, count=req.n,
            max_tokens=req.max_tokens)
        return {
            "model": req.model,
            "choices": [
                {"index": i,
                 "message": {"role": "assistant", "content": text},
                 "finish_reason": "stop"}
                for i, text in enumerate(completions)
            ],
        }

    @app.post("/embed")
    def embed(req: TextsRequest) -> dict:
        return {"vectors": score(backends.embedder.embed, req.texts)}

    @app.post("/emotions")
    def emotions(req: TextsRequest) -> dict:
        return {"vectors": score(backends.emotions.emotions, req.texts)}

    @app.post("/toxicity")
    def toxicity(req: TextsRequest) -> dict:
        return {"scores": score(backends.toxicity.toxicity, req.texts)}

    @app.post("/perplexity")
    def perplexity(req: TextsRequest) -> dict:
        return {"scores": score(backends.perplexity.perplexity, req.texts)}

    return app


def serve(cfg: AdapterConfig, host: str = "127.0.0.1") -> None:
    import uvicorn

    uvicorn.run(create_app(cfg), host=host, port=cfg.port)
