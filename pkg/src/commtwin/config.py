"""Run configuration: YAML in, validated dataclasses out.

Defaults mirror the reference operating points of the method (10K curated
tweets per community, 400 perplexity ceiling, 0.7 near-copy ceiling, 6K
synthetic cap, 50 screener samples), so a config file only needs to state
what differs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml


def _from_dict(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return cls(**data)


class ConfigError(ValueError):
    """Bad or inconsistent run configuration."""


@dataclass
class ProviderSettings:
    kind: str = "mock"            # "mock" or "http"
    endpoint: str = ""
    model: str = ""
    timeout: float = 60.0
    max_in_flight: int = 4
    max_attempts: int = 3
    batch_size: int = 64

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "http"):
            raise ConfigError(f"provider kind must be mock or http, "
                              f"got {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ConfigError("http provider needs an endpoint")


@dataclass
class CommunitySettings:
    resolution: float = 1.0
    top_clusters: int = 20
    min_documents: int = 10

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ConfigError("resolution must be > 0")
        if self.top_clusters < 1:
            raise ConfigError("top_clusters must be >= 1")


@dataclass
class CurationSettings:
    cap: int = 10000
    lowercase: bool = False

    def __post_init__(self) -> None:
        if self.cap < 1:
            raise ConfigError("curation cap must be >= 1")


@dataclass
class DemoSettings:
    general_path: str = ""
    general_fraction: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.general_fraction <= 1.0:
            raise ConfigError("general_fraction must lie in [0, 1]")
        if self.general_fraction > 0 and not self.general_path:
            raise ConfigError("general_fraction set but no general_path")


@dataclass
class GenerationSettings:
    per_topic: int = 1000
    temperature: float = 1.0
    max_tokens: int = 80
    exemplars: int = 250
    exemplar_tokens: int = 20

    def __post_init__(self) -> None:
        if self.per_topic < 1:
            raise ConfigError("per_topic must be >= 1")
        if self.exemplars < 1:
            raise ConfigError("exemplars must be >= 1")


@dataclass
class FilterSettings:
    max_perplexity: float = 400.0
    max_rouge: float = 0.7
    cap: int = 6000

    def __post_init__(self) -> None:
        if not 0.0 <= self.max_rouge <= 1.0:
            raise ConfigError("max_rouge must lie in [0, 1]")
        if self.cap < 1:
            raise ConfigError("filter cap must be >= 1")


@dataclass
class EvaluationSettings:
    toxicity_threshold: float = 0.05
    origin_train_per_community: int = 3000
    origin_test_fraction: float = 0.05
    triplets_per_community: int = 50
    harm_per_source: int = 20

    def __post_init__(self) -> None:
        if not 0.0 <= self.toxicity_threshold <= 1.0:
            raise ConfigError("toxicity_threshold must lie in [0, 1]")
        if not 0.0 < self.origin_test_fraction < 1.0:
            raise ConfigError("origin_test_fraction must lie in (0, 1)")


@dataclass
class ScreeningSettings:
    samples: int = 50
    temperature: float = 1.0
    retry_rounds: int = 3

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ConfigError("screening samples must be >= 1")
        if self.retry_rounds < 0:
            raise ConfigError("retry_rounds must be >= 0")


@dataclass
class RunConfig:
    workdir: str = "run"
    seed: int = 0
    offline: bool = False
    providers: dict[str, ProviderSettings] = field(default_factory=dict)
    community: CommunitySettings = field(default_factory=CommunitySettings)
    curation: CurationSettings = field(default_factory=CurationSettings)
    demos: DemoSettings = field(default_factory=DemoSettings)
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    filter: FilterSettings = field(default_factory=FilterSettings)
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    screening: ScreeningSettings = field(default_factory=ScreeningSettings)

    # provider roles the pipeline asks for: "base" answers untuned
    # generation and all scoring; "tuned" is the community-aligned
    # generator, its model name may contain "{community}".
    ROLES = ("base", "tuned")

    def provider_for(self, role: str) -> ProviderSettings:
        if role in self.providers:
            return self.providers[role]
        return ProviderSettings(kind="mock")

    def as_dict(self) -> dict:
        data = asdict(self)
        data["providers"] = {k: asdict(v) for k, v in self.providers.items()}
        return data

    def digest(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


_SECTIONS = {
    "community": CommunitySettings,
    "curation": CurationSettings,
    "demos": DemoSettings,
    "generation": GenerationSettings,
    "filter": FilterSettings,
    "evaluation": EvaluationSettings,
    "screening": ScreeningSettings,
}


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    cfg = RunConfig()
    cfg.workdir = str(data.pop("workdir", cfg.workdir))
    cfg.seed = int(data.pop("seed", cfg.seed))
    cfg.offline = bool(data.pop("offline", cfg.offline))
    providers = data.pop("providers", {})
    if not isinstance(providers, dict):
        raise ConfigError("providers must be a mapping of role -> settings")
    for role, settings in providers.items():
        if role not in RunConfig.ROLES:
            raise ConfigError(f"unknown provider role {role!r}, "
                              f"expected one of {RunConfig.ROLES}")
        cfg.providers[role] = _from_dict(ProviderSettings, settings or {},
                                         f"providers.{role}")
    for name, cls in _SECTIONS.items():
        section = data.pop(name, None)
        if section is not None:
            if not isinstance(section, dict):
                raise ConfigError(f"{name} must be a mapping")
            setattr(cfg, name, _from_dict(cls, section, name))
    if data:
        raise ConfigError(f"unknown config keys {sorted(data)}")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data or {})
