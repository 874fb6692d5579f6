"""Service configuration. Model choices are data, not code."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import yaml


class AdapterConfigError(ValueError):
    pass


@dataclass
class AdapterConfig:
    # one model spec per capability; "tiny-base" trains the bundled
    # generator from scratch, a path loads a saved (e.g. finetuned) one
    generator: str = "tiny-base"
    embedder: str = "hashed:256"
    emotions: str = "lexicon:builtin"
    toxicity: str = "lexicon:builtin"
    perplexity: str = "bigram:builtin"
    device: str = "cpu"
    batch_size: int = 32
    port: int = 8300
    seed: int = 0

    def __post_init__(self) -> None:
        if self.device not in ("cpu", "cuda"):
            raise AdapterConfigError(f"device must be cpu or cuda, "
                                     f"got {self.device!r}")
        if self.batch_size < 1:
            raise AdapterConfigError("batch_size must be >= 1")
        if not 0 < self.port < 65536:
            raise AdapterConfigError(f"port {self.port} out of range")
        for capability in ("generator", "embedder", "emotions", "toxicity",
                           "perplexity"):
            if not getattr(self, capability):
                raise AdapterConfigError(f"{capability} model spec is empty")


def load_adapter_config(path: str | Path) -> AdapterConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise AdapterConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise AdapterConfigError(f"{path}: config root must be a mapping")
    known = {f.name for f in fields(AdapterConfig)}
    unknown = set(data) - known
    if unknown:
        raise AdapterConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return AdapterConfig(**data)
