"""Digital twins of online communities.

Detects communities in interaction graphs, curates their posts, builds
instruction-tuning demonstrations, generates and filters synthetic corpora
through model endpoints, measures how well the synthetic text matches the
original along authenticity, emotion, and toxicity, and administers a
psychometric screener to the aligned models.
"""

__version__ = "0.1.0"

from .corpus import Corpus, Document, clean_text, curate, dedup_exact
from .demos import INSTRUCTION_POOL, Demonstration, build_demonstrations
from .graph import InteractionGraph, Partition, build_graph, louvain, modularity
from .metrics import (cohens_kappa, emotional_alignment, frechet_distance,
                      js_divergence, macro_f1, max_rouge_l, rouge_l)
from .providers import (EMOTION_LABELS, CachingProvider, EmotionVector,
                        HttpProvider, MockProvider, ProviderConfig,
                        ProviderError, ProtocolError, ScoringError,
                        TransportError)
from .synthgen import (TOPICS, filter_synthetic, generate_context_corpus,
                       generate_finetuned_corpus)
from .screen import SWED_ITEMS, screen_community, wcs_score
from .config import RunConfig, load_config

__all__ = [
    "Corpus", "Document", "clean_text", "curate", "dedup_exact",
    "INSTRUCTION_POOL", "Demonstration", "build_demonstrations",
    "InteractionGraph", "Partition", "build_graph", "louvain", "modularity",
    "cohens_kappa", "emotional_alignment", "frechet_distance",
    "js_divergence", "macro_f1", "max_rouge_l", "rouge_l",
    "EMOTION_LABELS", "CachingProvider", "EmotionVector", "HttpProvider",
    "MockProvider", "ProviderConfig", "ProviderError", "ProtocolError",
    "ScoringError", "TransportError",
    "TOPICS", "filter_synthetic", "generate_context_corpus",
    "generate_finetuned_corpus",
    "SWED_ITEMS", "screen_community", "wcs_score",
    "RunConfig", "load_config",
]
