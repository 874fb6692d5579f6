"""Reference model-adapter service for the community-twin provider protocol."""

from .backends import (BackendLoadError, BigramPerplexity, HashedEmbedder,
                       LexiconEmotions, LexiconToxicity)
from .config import AdapterConfig, AdapterConfigError, load_adapter_config
from .finetune import DemonstrationError, finetune, read_demonstrations
from .lexicons import EMOTION_LABELS
from .service import Backends, create_app, load_backends, serve
from .textgen import TextGenerator, TinyLM, Vocab, bundled_corpus

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterConfigError",
    "BackendLoadError",
    "Backends",
    "BigramPerplexity",
    "DemonstrationError",
    "EMOTION_LABELS",
    "HashedEmbedder",
    "LexiconEmotions",
    "LexiconToxicity",
    "TextGenerator",
    "TinyLM",
    "Vocab",
    "bundled_corpus",
    "create_app",
    "finetune",
    "load_adapter_config",
    "load_backends",
    "read_demonstrations",
    "serve",
]
