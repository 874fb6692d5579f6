"""Instruction-tuning demonstrations built from curated community posts.

Each curated post becomes one (instruction, input, response) triple: the
instruction is drawn from a fixed pool of 20 tweet-elicitation phrasings,
the input stays empty, and the response is the post verbatim. Mixing in a
slice of general-purpose instruction data is supported so a tuned model
keeps its instruction-following behavior.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus

INSTRUCTION_POOL = (
    "What would you tweet?",
    "What tweet would you send out?",
    "What's your tweet today?",
    "What would you want to tweet about?",
    "What's on your mind to tweet?",
    "What tweet would you drop?",
    "What would you say?",
    "What's your tweet?",
    "Tweet something.",
    "Share your thought with a tweet.",
    "What kind of tweet would you send out to engage with fellow members?",
    "Draft a tweet that captures the interests and spirit of the community.",
    "Craft a relatable tweet that resonates with members.",
    "Share a tweet that sparks conversation on relevant topics.",
    "Compose a tweet that reflects the shared voice and passions.",
    "Author an insightful tweet that inspires dialogue among members.",
    "Tweet something that provokes intellectual discourse.",
    "Tweet an observation or perspective that contributes meaningfully.",
    "Craft a tweet that elevates the ongoing conversations.",
    "Compose a tweet that encourages enriching engagement.",
)

_TERMINAL = ".?!"


@dataclass(frozen=True)
class Demonstration:
    instruction: str
    input: str
    response: str

    def __post_init__(self) -> None:
        if not self.instruction:
            raise ValueError("instruction must be non-empty")
        if not self.response:
            raise ValueError("response must be non-empty")


def topicalize(template: str, topic: str) -> str:
    """Steer a template toward a topic: 'What would you say?' ->
    'What would you say about thinspo?'"""
    if not topic:
        raise ValueError("topic must be non-empty")
    stripped = template.rstrip()
    mark = ""
    if stripped and stripped[-1] in _TERMINAL:
        mark = stripped[-1]
        stripped = stripped[:-1].rstrip()
    return f"{stripped} about {topic}{mark}"


def build_demonstrations(corpus: Corpus, seed: int,
                         topic: str | None = None) -> list[Demonstration]:
    """One demonstration per document, templates drawn uniformly at random."""
    rng = random.Random(seed)
    demos = []
    for doc in corpus.documents:
        template = INSTRUCTION_POOL[rng.randrange(len(INSTRUCTION_POOL))]
        if topic:
            template = topicalize(template, topic)
        demos.append(Demonstration(instruction=template, input="",
                                   response=doc.text))
    return demos


def augment_with_general(demos: Sequence[Demonstration], general_path: str | Path,
                         fraction: float, seed: int) -> list[Demonstration]:
    """Append a seeded sample of general instruction data.

    ``fraction`` is relative to len(demos): 0.1 adds one general record per
    ten community demonstrations. Sampling without replacement; if the file
    has fewer records than requested, all of them are used.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    pool = read_demonstrations(general_path)
    want = min(round(len(demos) * fraction), len(pool))
    rng = random.Random(seed)
    extra = rng.sample(pool, want) if want else []
    return list(demos) + extra


def export_demonstrations(demos: Iterable[Demonstration], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for demo in demos:
            record = {"instruction": demo.instruction, "input": demo.input,
                      "output": demo.response}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_demonstrations(path: str | Path) -> list[Demonstration]:
    demos = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(record, dict):
                raise ValueError(f"{path}:{lineno}: expected an object")
            for key in ("instruction", "output"):
                if not isinstance(record.get(key), str) or not record[key]:
                    raise ValueError(
                        f"{path}:{lineno}: missing or empty {key!r}")
            demos.append(Demonstration(
                instruction=record["instruction"],
                input=str(record.get("input", "")),
                response=record["output"]))
    return demos
