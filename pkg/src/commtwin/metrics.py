"""Alignment metrics: lexical overlap, distribution distance, agreement.

Everything here is pure computation on arrays and token lists; nothing
talks to a model service.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Sequence

import numpy as np

# Eigenvalues of the covariance cross-product more negative than this are a
# real numerical problem, not roundoff, and abort the computation.
_EIG_TOL = -1e-8


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    # rolling 1-D table; O(len(a) * len(b)) time, O(len(b)) space
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge_l(a: str, b: str) -> float:
    """ROUGE-L F1 on lowercased whitespace tokens. Empty input scores 0."""
    ta, tb = _tokens(a), _tokens(b)
    if not ta or not tb:
        return 0.0
    lcs = _lcs_len(ta, tb)
    if lcs == 0:
        return 0.0
    precision = lcs / len(ta)
    recall = lcs / len(tb)
    return 2 * precision * recall / (precision + recall)


def max_rouge_l(candidate: str, references: Sequence[str]) -> float:
    """Highest ROUGE-L F1 of candidate against any reference.

    The LCS is bounded by the shared-token count, so F1(a, b) can never
    exceed 2*overlap / (len(a) + len(b)). References are visited in
    descending order of that bound and the scan stops once the bound drops
    to the best score already found. With an inverted token index the
    common case touches only references sharing tokens with the candidate.
    """
    ta = _tokens(candidate)
    if not ta or not references:
        return 0.0
    counts = Counter(ta)
    index: dict[str, list[int]] = defaultdict(list)
    ref_tokens: list[list[str]] = []
    for ri, ref in enumerate(references):
        toks = _tokens(ref)
        ref_tokens.append(toks)
        for tok in set(toks):
            index[tok].append(ri)
    overlap: Counter[int] = Counter()
    for tok, count in counts.items():
        for ri in index.get(tok, ()):
            overlap[ri] += min(count, ref_tokens[ri].count(tok))
    best = 0.0
    la = len(ta)
    scored = sorted(overlap.items(),
                    key=lambda kv: 2 * kv[1] / (la + len(ref_tokens[kv[0]])),
                    reverse=True)
    for ri, shared in scored:
        bound = 2 * shared / (la + len(ref_tokens[ri]))
        if bound <= best:
            break
        score = rouge_l(candidate, references[ri])
        if score > best:
            best = score
    return best


# ---------------------------------------------------------------------------
# Distribution distance on embeddings
# ---------------------------------------------------------------------------

def _mean_cov(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if x.ndim != 2:
        raise ValueError("expected a 2-D array of embedding rows")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples for an unbiased covariance")
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / (x.shape[0] - 1)
    return mu, sigma


def _psd_sqrt(sigma: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(sigma)
    if w.min() < _EIG_TOL:
        raise ValueError(f"covariance has eigenvalue {w.min():.3e} < {_EIG_TOL}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def frechet_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Squared Frechet distance between Gaussian fits of two embedding sets.

    ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the matrix
    square root taken through the symmetric product S_a^{1/2} S_b S_a^{1/2}
    so only a real symmetric eigendecomposition is ever needed.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError("inputs must be 2-D with matching dimensionality")
    mu_a, sig_a = _mean_cov(a)
    mu_b, sig_b = _mean_cov(b)
    root_a = _psd_sqrt(sig_a)
    inner = root_a @ sig_b @ root_a
    w = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    if w.min() < _EIG_TOL:
        raise ValueError(f"cross-product eigenvalue {w.min():.3e} < {_EIG_TOL}")
    tr_sqrt = float(np.sqrt(np.clip(w, 0.0, None)).sum())
    diff = mu_a - mu_b
    return float(diff @ diff + np.trace(sig_a) + np.trace(sig_b) - 2.0 * tr_sqrt)


# ---------------------------------------------------------------------------
# Emotion profile similarity
# ---------------------------------------------------------------------------

def _as_distribution(p: Sequence[float]) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D probability vector")
    if (arr < 0).any():
        raise ValueError("probabilities must be nonnegative")
    total = arr.sum()
    if total <= 0:
        raise ValueError("probability vector sums to zero")
    return arr / total


def js_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """Jensen-Shannon divergence, log base 2, so the range is [0, 1]."""
    dp, dq = _as_distribution(p), _as_distribution(q)
    if dp.shape != dq.shape:
        raise ValueError("vectors must have equal length")
    m = (dp + dq) / 2.0

    def kl(x: np.ndarray) -> float:
        mask = x > 0
        return float(np.sum(x[mask] * np.log2(x[mask] / m[mask])))

    return (kl(dp) + kl(dq)) / 2.0


def emotional_alignment(p: Sequence[float], q: Sequence[float]) -> float:
    """1 - JS distance between two emotion profiles; 1 means identical."""
    return 1.0 - math.sqrt(max(js_divergence(p, q), 0.0))


# ---------------------------------------------------------------------------
# Agreement and classification quality
# ---------------------------------------------------------------------------

def cohens_kappa(a: Sequence, b: Sequence) -> float:
    """Chance-corrected agreement between two label sequences."""
    if len(a) != len(b):
        raise ValueError("label sequences must have equal length")
    n = len(a)
    if n == 0:
        raise ValueError("label sequences must be non-empty")
    observed = sum(x == y for x, y in zip(a, b)) / n
    counts_a, counts_b = Counter(a), Counter(b)
    labels = set(counts_a) | set(counts_b)
    expected = sum(counts_a[l] * counts_b[l] for l in labels) / (n * n)
    if expected == 1.0:
        raise ValueError("kappa undefined: chance agreement is 1")
    return (observed - expected) / (1.0 - expected)


def macro_f1(y_true: Sequence, y_pred: Sequence,
             labels: Sequence | None = None) -> float:
    """Unweighted mean of per-label F1. Labels absent from both sides
    contribute 0, like the usual zero-division convention."""
    if len(y_true) != len(y_pred):
        raise ValueError("label sequences must have equal length")
    if not y_true:
        raise ValueError("label sequences must be non-empty")
    if labels is None:
        labels = sorted(set(y_true) | set(y_pred), key=str)
    if not labels:
        raise ValueError("no labels to score")
    scores = []
    for label in labels:
        tp = sum(t == label and p == label for t, p in zip(y_true, y_pred))
        fp = sum(t != label and p == label for t, p in zip(y_true, y_pred))
        fn = sum(t == label and p != label for t, p in zip(y_true, y_pred))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return sum(scores) / len(scores)
