"""Clients for external model services, plus a deterministic offline mock.

Five capabilities share one transport style: text generation speaks the
chat-completions JSON protocol at ``{endpoint}/v1/chat/completions``; the
scoring capabilities (embed / emotions / toxicity / perplexity) POST
``{"texts": [...]}`` to ``{endpoint}/<capability>`` and get back
``{"vectors": [...]}`` or ``{"scores": [...]}``.

Results always come back in input order, no matter how requests are batched
or parallelized. :class:`CachingProvider` wraps any client with a disk cache
so identical calls never touch the network twice.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import requests

EMOTION_LABELS = (
    "anger", "anticipation", "disgust", "fear", "joy", "love",
    "optimism", "pessimism", "sadness", "surprise", "trust",
)

DEFAULT_AUTH_ENV = "COMMTWIN_API_TOKEN"


class ProviderError(Exception):
    """Base class for provider failures."""


class TransportError(ProviderError):
    """HTTP or connection failure that survived the retry budget."""


class ProtocolError(ProviderError):
    """The endpoint answered, but not in the expected shape."""


class ScoringError(ProviderError):
    """A scoring batch failed; carries the input indices left unscored."""

    def __init__(self, message: str, indices: Sequence[int]):
        super().__init__(f"{message} (unscored input indices: {list(indices)})")
        self.indices = list(indices)


@dataclass
class ProviderConfig:
    endpoint: str
    model: str
    auth_token: str | None = None
    auth_env: str = DEFAULT_AUTH_ENV
    timeout: float = 60.0
    max_in_flight: int = 4
    max_attempts: int = 3
    backoff: float = 0.5
    batch_size: int = 64

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")

    def token(self) -> str | None:
        return self.auth_token or os.environ.get(self.auth_env)


@dataclass(frozen=True)
class EmotionVector:
    """Confidence per emotion, ordered as EMOTION_LABELS, each in [0, 1]."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(EMOTION_LABELS):
            raise ValueError(f"expected {len(EMOTION_LABELS)} components")
        if any(v < 0 or v > 1 for v in self.values):
            raise ValueError("emotion confidences must lie in [0, 1]")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(EMOTION_LABELS, self.values))


def _validate_toxicity(value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise ProtocolError(f"toxicity score {value} outside [0, 1]")
    return float(value)


# ---------------------------------------------------------------------------
# HTTP client
# ---------------------------------------------------------------------------

class HttpProvider:
    """Thread-safe client for one model endpoint."""

    def __init__(self, cfg: ProviderConfig):
        self.cfg = cfg
        self._session = requests.Session()
        self._lock = threading.Lock()
        self.calls = 0  # network requests issued

    @property
    def identity(self) -> tuple[str, str]:
        return (self.cfg.endpoint.rstrip("/"), self.cfg.model)

    def _post(self, path: str, payload: dict) -> dict:
        url = self.cfg.endpoint.rstrip("/") + path
        headers = {"Content-Type": "application/json"}
        token = self.cfg.token()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last_exc: Exception | None = None
        for attempt in range(self.cfg.max_attempts):
            if attempt:
                time.sleep(self.cfg.backoff * 2 ** (attempt - 1))
            with self._lock:
                self.calls += 1
            try:
                resp = self._session.post(url, json=payload, headers=headers,
                                          timeout=self.cfg.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last_exc = TransportError(f"HTTP {resp.status_code} from {url}")
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
            try:
                body = resp.json()
            except ValueError as exc:
                raise ProtocolError(
                    f"non-JSON response from {url}: {resp.text[:200]}") from exc
            if not isinstance(body, dict):
                raise ProtocolError(f"unexpected body from {url}: {str(body)[:200]}")
            return body
        raise TransportError(
            f"{url} unreachable after {self.cfg.max_attempts} attempts: {last_exc}")

    # -- generation ---------------------------------------------------------

    def generate(self, prompt: str, *, temperature: float = 1.0,
                 max_tokens: int | None = None, count: int = 1) -> list[str]:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        if count <= 0:
            return []
        payload = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "n": count,
        }
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens
        body = self._post("/v1/chat/completions", payload)
        try:
            choices = sorted(body["choices"], key=lambda c: c.get("index", 0))
            texts = [str(c["message"]["content"]) for c in choices]
        except (KeyError, TypeError) as exc:
            raise ProtocolError(
                f"malformed chat completion: {json.dumps(body)[:200]}") from exc
        if len(texts) != count:
            raise ProtocolError(
                f"asked for {count} completions, got {len(texts)}")
        return texts

    # -- scoring ------------------------------------------------------------

    def _score_batched(self, path: str, texts: Sequence[str], key: str) -> list:
        """POST texts in batches, bounded concurrency, results in input order."""
        if not texts:
            raise ValueError("texts must be a non-empty list")
        size = max(1, self.cfg.batch_size)
        batches = [(i, list(texts[i:i + size])) for i in range(0, len(texts), size)]

        def run(batch: tuple[int, list[str]]):
            start, chunk = batch
            body = self._post(path, {"texts": chunk})
            values = body.get(key)
            if not isinstance(values, list) or len(values) != len(chunk):
                raise ProtocolError(
                    f"{path}: expected {len(chunk)} entries under "
                    f"{key!r}, got {json.dumps(body)[:200]}")
            return start, values

        results: dict[int, list] = {}
        failures: list[tuple[int, int, Exception]] = []
        with ThreadPoolExecutor(max_workers=self.cfg.max_in_flight) as pool:
            futures = [(start, len(chunk), pool.submit(run, (start, chunk)))
                       for start, chunk in batches]
            for start, length, fut in futures:
                try:
                    s, values = fut.result()
                    results[s] = values
                except ProviderError as exc:
                    failures.append((start, length, exc))
        if failures:
            indices = [i for start, length, _ in failures
                       for i in range(start, start + length)]
            first = failures[0][2]
            raise ScoringError(f"{path} failed: {first}", indices)
        out: list = []
        for start, _ in batches:
            out.extend(results[start])
        return out

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        vectors = self._score_batched("/embed", texts, "vectors")
        dims = {len(v) for v in vectors}
        if len(dims) != 1:
            raise ProtocolError(f"mixed embedding dimensions: {sorted(dims)}")
        return [[float(x) for x in v] for v in vectors]

    def emotions(self, texts: Sequence[str]) -> list[EmotionVector]:
        vectors = self._score_batched("/emotions", texts, "vectors")
        try:
            return [EmotionVector(tuple(float(x) for x in v)) for v in vectors]
        except ValueError as exc:
            raise ProtocolError(f"bad emotion vector: {exc}") from exc

    def toxicity(self, texts: Sequence[str]) -> list[float]:
        scores = self._score_batched("/toxicity", texts, "scores")
        return [_validate_toxicity(float(s)) for s in scores]

    def perplexity(self, texts: Sequence[str]) -> list[float]:
        scores = self._score_batched("/perplexity", texts, "scores")
        out = [float(s) for s in scores]
        if any(s < 0 for s in out):
            raise ProtocolError("negative perplexity in response")
        return out


# ---------------------------------------------------------------------------
# Deterministic mock
# ---------------------------------------------------------------------------

_OPTION_LINE_RE = re.compile(r"^\s*([a-z])\)\s", re.MULTILINE)
_TOPIC_RE = re.compile(r"about\s+([\w &-]+?)[?.!]")

_MOCK_WORDS = (
    "today feels different and the scale agrees with nobody honestly "
    "trying again tomorrow because progress is never linear friends "
    "water before every meal keeps the cravings quiet for hours "
    "posted my update late but consistency matters more than speed "
    "some days the mirror wins other days the plan does work "
    "counting steps around the block while the playlist carries me "
    "meal prep done early so the week cannot surprise anyone "
    "small goals add up faster than motivation ever could alone"
).split()


class MockProvider:
    """Offline stand-in for every capability; same inputs, same outputs.

    Outputs are derived by keyed hashing of (seed, capability, input), so
    distinct inputs practically never collide and call order is irrelevant.
    """

    def __init__(self, seed: int = 0, model: str = "mock",
                 embed_dim: int = 16, garble_rate: float = 0.04):
        self.seed = seed
        self.model = model
        self.embed_dim = embed_dim
        self.garble_rate = garble_rate
        self.calls = 0  # backend invocations (what the cache layer avoids)

    @property
    def identity(self) -> tuple[str, str]:
        return (f"mock://{self.seed}", self.model)

    def _rng(self, *key: object) -> random.Random:
        digest = hashlib.blake2b(
            "\x1f".join(str(k) for k in key).encode("utf-8"),
            key=str(self.seed).encode("utf-8"), digest_size=8).digest()
        return random.Random(int.from_bytes(digest, "big"))

    # -- generation ---------------------------------------------------------

    def generate(self, prompt: str, *, temperature: float = 1.0,
                 max_tokens: int | None = None, count: int = 1) -> list[str]:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        if count <= 0:
            return []
        self.calls += 1
        params = (round(temperature, 6), max_tokens)
        return [self._completion(prompt, params, i) for i in range(count)]

    def _completion(self, prompt: str, params: tuple, i: int) -> str:
        rng = self._rng("generate", prompt, params, i)
        options = _OPTION_LINE_RE.findall(prompt)
        if "only with the letter" in prompt and options:
            if rng.random() < self.garble_rate:
                return "I would rather talk about something else."
            letter = options[rng.randrange(len(options))]
            return rng.choice([letter, f"{letter})", f"{letter.upper()}."])
        if "with a number" in prompt and not options:
            return str(rng.randrange(90, 230))
        words = [rng.choice(_MOCK_WORDS)
                 for _ in range(rng.randrange(6, 15))]
        topic = _TOPIC_RE.search(prompt)
        if topic:
            words.insert(rng.randrange(len(words)), topic.group(1).strip())
        return " ".join(words)

    # -- scoring ------------------------------------------------------------

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        if not texts:
            raise ValueError("texts must be a non-empty list")
        self.calls += 1
        out = []
        for text in texts:
            rng = self._rng("embed", text)
            out.append([rng.gauss(0.0, 1.0) for _ in range(self.embed_dim)])
        return out

    def emotions(self, texts: Sequence[str]) -> list[EmotionVector]:
        if not texts:
            raise ValueError("texts must be a non-empty list")
        self.calls += 1
        out = []
        for text in texts:
            rng = self._rng("emotions", text)
            out.append(EmotionVector(tuple(rng.random() for _ in EMOTION_LABELS)))
        return out

    def toxicity(self, texts: Sequence[str]) -> list[float]:
        if not texts:
            raise ValueError("texts must be a non-empty list")
        self.calls += 1
        # squared uniform: skews low like real toxicity scores
        return [self._rng("toxicity", t).random() ** 2 for t in texts]

    def perplexity(self, texts: Sequence[str]) -> list[float]:
        if not texts:
            raise ValueError("texts must be a non-empty list")
        self.calls += 1
        return [20.0 + 480.0 * self._rng("perplexity", t).random() for t in texts]


# ---------------------------------------------------------------------------
# Disk cache
# ---------------------------------------------------------------------------

class CachingProvider:
    """Disk-backed memo layer over any provider.

    Scoring results are cached per text, generation per completion index, so
    reruns and partially overlapping batches are free. Keys cover the
    provider identity (endpoint, model), the capability, the input hash, and
    the sampling parameters.
    """

    def __init__(self, inner, cache_dir: str | Path):
        self.inner = inner
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    @property
    def calls(self) -> int:
        return self.inner.calls

    @property
    def identity(self) -> tuple[str, str]:
        return self.inner.identity

    def _key(self, op: str, payload: str, params: str = "") -> Path:
        endpoint, model = self.inner.identity
        raw = "\x1f".join((endpoint, model, op, payload, params))
        digest = hashlib.sha256(raw.encode("utf-8")).hexdigest()
        return self.cache_dir / op / digest[:2] / f"{digest}.json"

    @staticmethod
    def _load(path: Path):
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)["value"]

    @staticmethod
    def _store(path: Path, value) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"value": value}, fh, ensure_ascii=False)
        os.replace(tmp, path)

    def generate(self, prompt: str, *, temperature: float = 1.0,
                 max_tokens: int | None = None, count: int = 1) -> list[str]:
        if count <= 0:
            return []
        params = json.dumps({"temperature": temperature, "max_tokens": max_tokens},
                            sort_keys=True)
        paths = [self._key("generate", f"{prompt}\x1f{i}", params)
                 for i in range(count)]
        cached = [self._load(p) for p in paths]
        missing = [i for i, v in enumerate(cached) if v is None]
        if missing:
            fresh = self.inner.generate(prompt, temperature=temperature,
                                        max_tokens=max_tokens, count=len(missing))
            for slot, value in zip(missing, fresh):
                cached[slot] = value
                self._store(paths[slot], value)
        return list(cached)

    def _scored(self, op: str, texts: Sequence[str], call) -> list:
        paths = [self._key(op, t) for t in texts]
        cached = [self._load(p) for p in paths]
        missing = [i for i, v in enumerate(cached) if v is None]
        if missing:
            fresh = call([texts[i] for i in missing])
            for slot, value in zip(missing, fresh):
                cached[slot] = value
                self._store(paths[slot], value)
        return list(cached)

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return self._scored("embed", texts, self.inner.embed)

    def emotions(self, texts: Sequence[str]) -> list[EmotionVector]:
        raw = self._scored(
            "emotions", texts,
            lambda chunk: [list(v.values) for v in self.inner.emotions(chunk)])
        return [EmotionVector(tuple(v)) for v in raw]

    def toxicity(self, texts: Sequence[str]) -> list[float]:
        return self._scored("toxicity", texts, self.inner.toxicity)

    def perplexity(self, texts: Sequence[str]) -> list[float]:
        return self._scored("perplexity", texts, self.inner.perplexity)
