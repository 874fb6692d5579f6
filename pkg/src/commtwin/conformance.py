"""Contract checks for a model endpoint.

Any service claiming to back this toolkit must pass these checks: the five
capabilities answer in the documented shapes, scores stay in range, results
come back in input order, and scoring is deterministic. Run them against a
live base URL with :func:`assert_conformance`, or collect the individual
results with :func:`run_conformance`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .providers import EMOTION_LABELS, HttpProvider, ProviderConfig

_SENTENCES = [
    "the morning walk cleared my head before work",
    "counting every step feels like progress today",
    "new recipe tonight and the kitchen smells amazing",
    "rest days matter as much as training days",
    "small wins add up to something worth keeping",
    "the group chat kept me honest this week",
    "water first coffee second that is the rule",
    "grocery list written meals planned week sorted",
    "stretching before bed became my favorite habit",
    "one more lap because the playlist was not done",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _generate_count(p: HttpProvider) -> None:
    outs = p.generate("Write one short sentence about weekend plans.",
                      count=3, max_tokens=60)
    assert len(outs) == 3, f"asked for 3 completions, got {len(outs)}"
    assert all(isinstance(o, str) and o.strip() for o in outs), \
        "empty or non-string completion"


def _generate_single(p: HttpProvider) -> None:
    outs = p.generate("Say hello.", count=1, max_tokens=20)
    assert len(outs) == 1 and outs[0].strip(), "bad single completion"


def _embed_shape(p: HttpProvider) -> None:
    vectors = p.embed(_SENTENCES[:3] + [_SENTENCES[0]])
    assert len(vectors) == 4, f"expected 4 vectors, got {len(vectors)}"
    dims = {len(v) for v in vectors}
    assert len(dims) == 1, f"mixed dimensions {dims}"
    assert vectors[0] == vectors[3], "same text, different embedding"


def _emotions_range(p: HttpProvider) -> None:
    vectors = p.emotions(_SENTENCES[:3])
    assert len(vectors) == 3, f"expected 3 vectors, got {len(vectors)}"
    for v in vectors:
        assert len(v.values) == len(EMOTION_LABELS)
        assert all(0.0 <= x <= 1.0 for x in v.values), \
            f"emotion score outside [0, 1]: {v.values}"


def _toxicity_range(p: HttpProvider) -> None:
    scores = p.toxicity(_SENTENCES[:4])
    assert len(scores) == 4, f"expected 4 scores, got {len(scores)}"
    assert all(0.0 <= s <= 1.0 for s in scores), \
        f"toxicity outside [0, 1]: {scores}"


def _perplexity_nonnegative(p: HttpProvider) -> None:
    scores = p.perplexity(_SENTENCES[:4])
    assert len(scores) == 4, f"expected 4 scores, got {len(scores)}"
    assert all(s >= 0.0 for s in scores), f"negative perplexity: {scores}"


def _scoring_order(p: HttpProvider) -> None:
    # batch_size is 4, so 10 texts exercise multi-batch reassembly
    forward = p.perplexity(_SENTENCES)
    backward = p.perplexity(list(reversed(_SENTENCES)))
    assert forward == list(reversed(backward)), \
        "scores do not follow input order"


def _scoring_deterministic(p: HttpProvider) -> None:
    first = p.perplexity(_SENTENCES[:5])
    second = p.perplexity(_SENTENCES[:5])
    assert first == second, "same texts scored differently across calls"


_CHECKS = (
    ("generate-count", _generate_count),
    ("generate-single", _generate_single),
    ("embed-shape", _embed_shape),
    ("emotions-range", _emotions_range),
    ("toxicity-range", _toxicity_range),
    ("perplexity-nonnegative", _perplexity_nonnegative),
    ("scoring-order", _scoring_order),
    ("scoring-deterministic", _scoring_deterministic),
)


def run_conformance(base_url: str, model: str = "default", *,
                    timeout: float = 120.0) -> list[CheckResult]:
    # a contract probe should answer quickly, not grind through retries
    provider = HttpProvider(ProviderConfig(
        endpoint=base_url, model=model, timeout=timeout,
        batch_size=4, max_in_flight=2, max_attempts=2, backoff=0.2))
    results = []
    for name, check in _CHECKS:
        try:
            check(provider)
        except AssertionError as exc:
            results.append(CheckResult(name, False, str(exc)))
        except Exception as exc:  # transport/protocol failures count too
            results.append(CheckResult(name, False,
                                       f"{type(exc).__name__}: {exc}"))
        else:
            results.append(CheckResult(name, True))
    return results


def assert_conformance(base_url: str, model: str = "default", *,
                       timeout: float = 120.0) -> None:
    failures = [r for r in run_conformance(base_url, model, timeout=timeout)
                if not r.passed]
    if failures:
        lines = [f"  {r.name}: {r.detail}" for r in failures]
        raise AssertionError(
            f"{len(failures)} conformance check(s) failed against "
            f"{base_url}:\n" + "\n".join(lines))
