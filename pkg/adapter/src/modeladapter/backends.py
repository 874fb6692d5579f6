"""Scoring backends: embeddings, emotions, toxicity, perplexity.

Each backend is a plain object with a `model_id` and one scoring method
taking a list of texts. The builtin implementations are deterministic and
dependency-light so the service runs anywhere; real models slot in behind
the same builder names.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from typing import Sequence

import numpy as np

from .lexicons import EMOTION_LABELS, EMOTION_WORDS, TOXICITY_WORDS
from .textgen import bundled_corpus, tokenize


class BackendLoadError(RuntimeError):
    """A configured model failed to load; names the capability and model."""


class HashedEmbedder:
    """Feature-hashed bag of words, L2-normalized. Identical texts map to
    identical vectors by construction."""

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise ValueError("embedding dim must be >= 8")
        self.dim = dim
        self.model_id = f"hashed:{dim}"

    def _slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"),
                                 digest_size=8).digest()
        value = int.from_bytes(digest, "big")
        return value % self.dim, 1.0 if (value >> 63) & 1 else -1.0

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vec = np.zeros(self.dim)
            for token in tokenize(text):
                slot, sign = self._slot(token)
                vec[slot] += sign
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec /= norm
            out.append(vec.tolist())
        return out


def _hit_count(text: str, words: frozenset[str]) -> int:
    return sum(1 for tok in tokenize(text) if tok in words)


class LexiconEmotions:
    """Confidence per emotion label from keyword hits, saturating toward 1."""

    def __init__(self):
        self.model_id = "lexicon:builtin"
        self._words = {label: frozenset(EMOTION_WORDS[label])
                       for label in EMOTION_LABELS}

    def emotions(self, texts: Sequence[str]) -> list[list[float]]:
        return [[1.0 - math.exp(-_hit_count(text, self._words[label]))
                 for label in EMOTION_LABELS] for text in texts]


class LexiconToxicity:
    def __init__(self):
        self.model_id = "lexicon:builtin"
        self._words = frozenset(TOXICITY_WORDS)

    def toxicity(self, texts: Sequence[str]) -> list[float]:
        return [1.0 - math.exp(-2.0 * _hit_count(text, self._words))
                for text in texts]


class BigramPerplexity:
    """Interpolated word-bigram model. Scrambling a sentence destroys its
    bigrams, so fluent text scores lower than shuffled text."""

    # mixture weights: bigram, unigram, uniform floor
    L2, L1, L0 = 0.75, 0.20, 0.05
    BOS = "<s>"

    def __init__(self, lines: Sequence[str] | None = None):
        lines = list(lines) if lines is not None else bundled_corpus()
        if not lines:
            raise ValueError("perplexity model needs training lines")
        self.model_id = "bigram:builtin"
        self._unigrams: Counter = Counter()
        self._bigrams: Counter = Counter()
        self._context: Counter = Counter()
        for line in lines:
            tokens = [self.BOS] + tokenize(line)
            self._unigrams.update(tokens[1:])
            for prev, cur in zip(tokens, tokens[1:]):
                self._bigrams[(prev, cur)] += 1
                self._context[prev] += 1
        self._total = sum(self._unigrams.values())
        self._vsize = len(self._unigrams) + 1

    def _prob(self, prev: str, cur: str) -> float:
        p_bi = (self._bigrams[(prev, cur)] / self._context[prev]
                if self._context[prev] else 0.0)
        p_uni = (self._unigrams[cur] + 1) / (self._total + self._vsize)
        return self.L2 * p_bi + self.L1 * p_uni + self.L0 / self._vsize

    def perplexity(self, texts: Sequence[str]) -> list[float]:
        out = []
        for text in texts:
            tokens = [self.BOS] + tokenize(text)
            if len(tokens) == 1:
                out.append(0.0)
                continue
            log_sum = sum(math.log(self._prob(prev, cur))
                          for prev, cur in zip(tokens, tokens[1:]))
            out.append(math.exp(-log_sum / (len(tokens) - 1)))
        return out


def _split_spec(capability: str, spec: str) -> tuple[str, str]:
    kind, _, arg = spec.partition(":")
    if not kind:
        raise BackendLoadError(f"{capability}: empty model spec")
    return kind, arg


def build_embedder(spec: str) -> HashedEmbedder:
    kind, arg = _split_spec("embedder", spec)
    if kind == "hashed":
        try:
            return HashedEmbedder(int(arg or 256))
        except ValueError as exc:
            raise BackendLoadError(f"embedder model {spec!r}: {exc}") from None
    raise BackendLoadError(f"embedder model {spec!r}: unknown backend")


def build_emotions(spec: str) -> LexiconEmotions:
    kind, _ = _split_spec("emotions", spec)
    if kind == "lexicon":
        return LexiconEmotions()
    raise BackendLoadError(f"emotions model {spec!r}: unknown backend")


def build_toxicity(spec: str) -> LexiconToxicity:
    kind, _ = _split_spec("toxicity", spec)
    if kind == "lexicon":
        return LexiconToxicity()
    raise BackendLoadError(f"toxicity model {spec!r}: unknown backend")


def build_perplexity(spec: str) -> BigramPerplexity:
    kind, arg = _split_spec("perplexity", spec)
    if kind == "bigram":
        if arg in ("", "builtin"):
            return BigramPerplexity()
        try:
            with open(arg, encoding="utf-8") as fh:
                lines = [ln.strip() for ln in fh if ln.strip()]
            return BigramPerplexity(lines)
        except OSError as exc:
            raise BackendLoadError(
                f"perplexity model {spec!r}: {exc}") from None
    raise BackendLoadError(f"perplexity model {spec!r}: unknown backend")
