"""Alignment evaluation between an original corpus and its synthetic twins.

Four lenses: embedding-distribution distance (squared Frechet), emotion
profile similarity, toxicity rate, and an origin classifier that checks
whether synthetic tweets still carry their community's distinguishing
signal. Also packs blinded samples for human review.
"""

from __future__ import annotations

import math
import random
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .demos import Demonstration, export_demonstrations
from .metrics import emotional_alignment, frechet_distance, macro_f1

TOXICITY_THRESHOLD = 0.05

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

def emotion_profile(provider, texts: Sequence[str]) -> np.ndarray:
    """Corpus-level emotion distribution: mean confidence per emotion,
    normalized to sum 1."""
    if not texts:
        raise ValueError("cannot profile an empty text list")
    vectors = provider.emotions(texts)
    mean = np.mean([v.values for v in vectors], axis=0)
    total = mean.sum()
    if total <= 0:
        raise ValueError("emotion scores sum to zero across the corpus")
    return mean / total


def toxicity_rate(provider, texts: Sequence[str],
                  threshold: float = TOXICITY_THRESHOLD) -> float:
    """Fraction of texts at or above the toxicity threshold."""
    if not texts:
        raise ValueError("cannot score an empty text list")
    scores = provider.toxicity(texts)
    return sum(s >= threshold for s in scores) / len(scores)


# ---------------------------------------------------------------------------
# Origin classification
# ---------------------------------------------------------------------------

class NaiveBayesOriginClassifier:
    """Multinomial bag-of-words classifier with add-one smoothing.

    Deliberately simple: if even this cannot tell communities apart, the
    synthetic corpora have lost the lexical signal.
    """

    def __init__(self, alpha: float = 1.0):
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        self.alpha = alpha
        self._labels: list[str] = []
        self._log_prior: dict[str, float] = {}
        self._log_like: dict[str, dict[str, float]] = {}
        self._default_log: dict[str, float] = {}
        self._vocab: set[str] = set()

    def fit(self, texts: Sequence[str], labels: Sequence[str]) -> None:
        if len(texts) != len(labels) or not texts:
            raise ValueError("texts and labels must be equal-length, non-empty")
        token_counts: dict[str, Counter[str]] = defaultdict(Counter)
        label_counts: Counter[str] = Counter()
        for text, label in zip(texts, labels):
            label_counts[label] += 1
            token_counts[label].update(_tokenize(text))
        self._labels = sorted(label_counts)
        if len(self._labels) < 2:
            raise ValueError("need at least two classes")
        self._vocab = set()
        for counts in token_counts.values():
            self._vocab.update(counts)
        n = len(texts)
        v = len(self._vocab)
        self._log_prior = {}
        self._log_like = {}
        self._default_log = {}
        for label in self._labels:
            self._log_prior[label] = math.log(label_counts[label] / n)
            total = sum(token_counts[label].values())
            denom = total + self.alpha * v
            self._log_like[label] = {
                tok: math.log((c + self.alpha) / denom)
                for tok, c in token_counts[label].items()}
            self._default_log[label] = math.log(self.alpha / denom)

    def predict(self, texts: Sequence[str]) -> list[str]:
        if not self._labels:
            raise ValueError("classifier is not fitted")
        out = []
        for text in texts:
            tokens = [t for t in _tokenize(text) if t in self._vocab]
            best_label, best_score = None, -math.inf
            for label in self._labels:
                like = self._log_like[label]
                default = self._default_log[label]
                score = self._log_prior[label] + sum(
                    like.get(tok, default) for tok in tokens)
                if score > best_score:
                    best_label, best_score = label, score
            out.append(best_label)
        return out


ORIGIN_INSTRUCTION = (
    "From these communities: {communities}. Which community does the "
    "following tweet come from? Answer only with the community name."
)


class ProviderOriginClassifier:
    """Origin classifier backed by a model endpoint.

    ``fit`` only records the label set; the endpoint is assumed to have been
    tuned on (or prompted with) the classification demonstrations exported
    by :func:`export_classification_demos`.
    """

    def __init__(self, provider, temperature: float = 0.0):
        self.provider = provider
        self.temperature = temperature
        self._labels: list[str] = []

    def fit(self, texts: Sequence[str], labels: Sequence[str]) -> None:
        self._labels = sorted(set(labels))
        if len(self._labels) < 2:
            raise ValueError("need at least two classes")

    def predict(self, texts: Sequence[str]) -> list[str]:
        if not self._labels:
            raise ValueError("classifier is not fitted")
        instruction = ORIGIN_INSTRUCTION.format(
            communities=", ".join(self._labels))
        out = []
        for text in texts:
            reply = self.provider.generate(
                f"{instruction}\nTweet: {text}",
                temperature=self.temperature, count=1)[0].lower()
            match = next((l for l in self._labels if l.lower() in reply),
                         self._labels[0])
            out.append(match)
        return out


def export_classification_demos(texts: Sequence[str], labels: Sequence[str],
                                path: str | Path) -> None:
    """Write origin-classification tuning data for the provider backend."""
    if len(texts) != len(labels) or not texts:
        raise ValueError("texts and labels must be equal-length, non-empty")
    communities = ", ".join(sorted(set(labels)))
    instruction = ORIGIN_INSTRUCTION.format(communities=communities)
    demos = [Demonstration(instruction=instruction, input=text, response=label)
             for text, label in zip(texts, labels)]
    export_demonstrations(demos, path)


def split_train_test(items: Sequence, test_fraction: float,
                     seed: int) -> tuple[list, list]:
    """Seeded shuffle split; test gets round(n * test_fraction), at least 1."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    order = list(items)
    random.Random(seed).shuffle(order)
    n_test = max(1, round(len(order) * test_fraction))
    return order[n_test:], order[:n_test]


def origin_macro_f1(classifier, test_texts: Sequence[str],
                    test_labels: Sequence[str]) -> float:
    predictions = classifier.predict(test_texts)
    return macro_f1(test_labels, predictions)


# ---------------------------------------------------------------------------
# Per-community report
# ---------------------------------------------------------------------------

@dataclass
class RouteMetrics:
    size: int
    frechet: float
    emotional_alignment: float
    toxicity_rate: float

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "frechet": self.frechet,
            "emotional_alignment": self.emotional_alignment,
            "toxicity_rate": self.toxicity_rate,
        }


@dataclass
class AlignmentReport:
    community: str
    original_size: int
    original_toxicity: float
    routes: dict[str, RouteMetrics] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "community": self.community,
            "original_size": self.original_size,
            "original_toxicity": self.original_toxicity,
            "routes": {name: m.as_dict() for name, m in self.routes.items()},
        }


def evaluate_community(provider, original: Corpus,
                       synthetic: Mapping[str, Corpus], *,
                       toxicity_threshold: float = TOXICITY_THRESHOLD,
                       ) -> AlignmentReport:
    """Score each synthetic route against the original corpus."""
    if not original.documents:
        raise ValueError(f"original corpus for {original.community} is empty")
    orig_texts = original.texts()
    orig_emb = np.asarray(provider.embed(orig_texts))
    orig_emo = emotion_profile(provider, orig_texts)
    report = AlignmentReport(
        community=original.community,
        original_size=len(orig_texts),
        original_toxicity=toxicity_rate(provider, orig_texts,
                                        toxicity_threshold))
    for name, corpus in synthetic.items():
        if not corpus.documents:
            raise ValueError(f"{name} corpus for {original.community} is empty")
        texts = corpus.texts()
        emb = np.asarray(provider.embed(texts))
        report.routes[name] = RouteMetrics(
            size=len(texts),
            frechet=frechet_distance(orig_emb, emb),
            emotional_alignment=emotional_alignment(
                orig_emo, emotion_profile(provider, texts)),
            toxicity_rate=toxicity_rate(provider, texts, toxicity_threshold))
    return report


# ---------------------------------------------------------------------------
# Blinded samples for human review
# ---------------------------------------------------------------------------

def sample_triplets(original: Corpus, finetuned: Corpus, context: Corpus, *,
                    per_community: int = 50, seed: int = 0,
                    ) -> tuple[list[dict], dict[str, dict[str, str]]]:
    """Blind (original, candidate_a, candidate_b) rows plus the answer key.

    Candidate order is re-randomized per row so the key is required to know
    which synthetic route produced which side.
    """
    rng = random.Random(seed)
    n = min(per_community, len(original.documents),
            len(finetuned.documents), len(context.documents))
    if n == 0:
        raise ValueError("all three corpora must be non-empty")
    orig = rng.sample(original.texts(), n)
    ft = rng.sample(finetuned.texts(), n)
    ctx = rng.sample(context.texts(), n)
    rows, key = [], {}
    for i in range(n):
        row_id = f"{original.community}-triplet-{i:04d}"
        sides = [("finetuned", ft[i]), ("context", ctx[i])]
        rng.shuffle(sides)
        rows.append({"id": row_id, "community": original.community,
                     "original": orig[i], "candidate_a": sides[0][1],
                     "candidate_b": sides[1][1]})
        key[row_id] = {"candidate_a": sides[0][0],
                       "candidate_b": sides[1][0]}
    return rows, key


def sample_harm_batch(sources: Mapping[str, Sequence[str]], *,
                      per_source: int = 20, seed: int = 0,
                      ) -> tuple[list[dict], dict[str, str]]:
    """Blind per-source text samples into one shuffled rating batch."""
    rng = random.Random(seed)
    entries = []
    for source in sorted(sources):
        texts = list(sources[source])
        if not texts:
            raise ValueError(f"source {source!r} has no texts")
        picked = rng.sample(texts, min(per_source, len(texts)))
        entries.extend((source, t) for t in picked)
    rng.shuffle(entries)
    rows, key = [], {}
    for i, (source, text) in enumerate(entries):
        row_id = f"harm-{i:04d}"
        rows.append({"id": row_id, "text": text})
        key[row_id] = source
    return rows, key
