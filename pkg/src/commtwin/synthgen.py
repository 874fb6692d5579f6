"""Synthetic corpus generation and quality filtering.

Two generation routes produce community-voiced tweets over a fixed topic
list: the finetuned route queries a community-tuned model with topicalized
instructions, the context route packs exemplar tweets into the prompt of an
untuned model. Both outputs pass the same filter before any evaluation:
exact dedup, a perplexity ceiling, a near-copy ceiling against the original
corpus, then a seeded downsample to the size cap.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .corpus import Corpus, Document
from .demos import INSTRUCTION_POOL, topicalize

TOPICS = (
    "thinspo", "fitspo", "bonespo", "deathspo", "caloric restriction",
    "meanspo", "ozempic", "wegovy", "fatspo", "fatphobia", "thighgap",
    "caloric counting", "purging", "food rules", "extreme diet", "food fear",
    "hiding food", "fasting", "starving", "steroid", "excessive exercising",
    "body dysmorphia", "working out", "anorexia", "bulimia", "orthorexia",
    "binge eating",
)

_CONTEXT_HEADER = (
    "You're part of an online community now. To help you describe this "
    "online community, here are the tweets made by members in this "
    "community about the topic of {topic}."
)
_CONTEXT_FOOTER = (
    "What would you tweet about {topic}? Learn the ideas and mindset of the "
    "community from these tweets and speak like a member from this "
    "community. Only generate one tweet."
)
_PROFILE_PROMPT = "Given this list of posts, summarize the main ideas in 1 sentence"


@dataclass
class FilterStats:
    initial: int
    after_dedup: int
    after_perplexity: int
    after_rouge: int
    final: int

    def as_dict(self) -> dict[str, int]:
        return {
            "initial": self.initial,
            "after_dedup": self.after_dedup,
            "after_perplexity": self.after_perplexity,
            "after_rouge": self.after_rouge,
            "final": self.final,
        }


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _checkpoint_path(checkpoint_dir: Path, topic_index: int) -> Path:
    return checkpoint_dir / f"topic_{topic_index:02d}.jsonl"


def _load_checkpoint(path: Path, expected: int) -> list[str] | None:
    if not path.exists():
        return None
    texts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                texts.append(json.loads(line)["text"])
    return texts if len(texts) == expected else None


def _save_checkpoint(path: Path, texts: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for text in texts:
            fh.write(json.dumps({"text": text}, ensure_ascii=False) + "\n")
    tmp.replace(path)


def _generate_by_topic(provider, community: str, tag: str, prompts: Sequence[str],
                       topics: Sequence[str], per_topic: int, temperature: float,
                       max_tokens: int | None,
                       checkpoint_dir: str | Path | None) -> list[Document]:
    """Run one generate call per topic, checkpointing each topic's output
    so an interrupted run resumes where it stopped."""
    ckpt_dir = Path(checkpoint_dir) if checkpoint_dir else None
    docs = []
    for ti, (topic, prompt) in enumerate(zip(topics, prompts)):
        texts = None
        if ckpt_dir:
            texts = _load_checkpoint(_checkpoint_path(ckpt_dir, ti), per_topic)
        if texts is None:
            texts = provider.generate(prompt, temperature=temperature,
                                      max_tokens=max_tokens, count=per_topic)
            if ckpt_dir:
                _save_checkpoint(_checkpoint_path(ckpt_dir, ti), texts)
        for i, text in enumerate(texts):
            docs.append(Document(
                id=f"{community}-{tag}-{ti:02d}-{i:04d}",
                community=community, text=text.strip(), topic=topic))
    return docs


def generate_finetuned_corpus(provider, community: str, *,
                              topics: Sequence[str] = TOPICS,
                              per_topic: int = 10, seed: int = 0,
                              temperature: float = 1.0,
                              max_tokens: int | None = 80,
                              checkpoint_dir: str | Path | None = None) -> Corpus:
    """Ask a community-tuned model to tweet about each topic."""
    rng = random.Random(seed)
    prompts = [topicalize(INSTRUCTION_POOL[rng.randrange(len(INSTRUCTION_POOL))],
                          topic)
               for topic in topics]
    docs = _generate_by_topic(provider, community, "ft", prompts, topics,
                              per_topic, temperature, max_tokens, checkpoint_dir)
    return Corpus(community, docs, provenance="finetuned")


def _exemplars_for_topic(source: Corpus, topic: str, limit: int,
                         rng: random.Random) -> list[str]:
    pattern = _phrase_pattern(topic)
    matching = [d.text for d in source.documents if pattern.search(d.text)]
    rest = [d.text for d in source.documents if not pattern.search(d.text)]
    rng.shuffle(matching)
    rng.shuffle(rest)
    return (matching + rest)[:limit]


def _truncate(text: str, max_words: int) -> str:
    return " ".join(text.split()[:max_words])


def build_context_prompt(source: Corpus, topic: str, *, exemplars: int = 250,
                         exemplar_tokens: int = 20,
                         rng: random.Random | None = None) -> str:
    """Pack exemplar tweets around a topic into a single untuned-model prompt.

    Tweets mentioning the topic come first; the rest of the budget is filled
    from the remainder of the corpus. Each exemplar is cut to its first
    ``exemplar_tokens`` words to keep the prompt within context limits.
    """
    if not source.documents:
        raise ValueError("source corpus is empty")
    rng = rng or random.Random(0)
    chosen = _exemplars_for_topic(source, topic, exemplars, rng)
    lines = [_CONTEXT_HEADER.format(topic=topic)]
    for i, text in enumerate(chosen, start=1):
        lines.append(f"Tweet {i}: {_truncate(text, exemplar_tokens)}")
    lines.append(_CONTEXT_FOOTER.format(topic=topic))
    return "\n".join(lines)


def generate_context_corpus(provider, source: Corpus, *,
                            topics: Sequence[str] = TOPICS,
                            per_topic: int = 10, seed: int = 0,
                            exemplars: int = 250, exemplar_tokens: int = 20,
                            temperature: float = 1.0,
                            max_tokens: int | None = 80,
                            checkpoint_dir: str | Path | None = None) -> Corpus:
    """Elicit community-voiced tweets from an untuned model via exemplars."""
    rng = random.Random(seed)
    prompts = [build_context_prompt(source, topic, exemplars=exemplars,
                                    exemplar_tokens=exemplar_tokens, rng=rng)
               for topic in topics]
    docs = _generate_by_topic(provider, source.community, "ctx", prompts, topics,
                              per_topic, temperature, max_tokens, checkpoint_dir)
    return Corpus(source.community, docs, provenance="context")


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------

def filter_synthetic(corpus: Corpus,
                     perplexity_scorer: Callable[[Sequence[str]], Sequence[float]],
                     reference_texts: Sequence[str], *,
                     max_perplexity: float = 400.0, max_rouge: float = 0.7,
                     cap: int = 6000, seed: int = 0) -> tuple[Corpus, FilterStats]:
    """Drop duplicates, incoherent text, and near-copies; cap the size.

    Order matters: dedup first so perplexity is never paid twice for the
    same text, the near-copy check runs against the original corpus, and
    the final seeded downsample only triggers past ``cap``. Boundary values
    survive: perplexity == max_perplexity and overlap == max_rouge stay in.
    """
    initial = len(corpus.documents)

    seen: set[str] = set()
    docs = []
    for doc in corpus.documents:
        if doc.text not in seen:
            seen.add(doc.text)
            docs.append(doc)
    after_dedup = len(docs)

    if docs:
        scores = perplexity_scorer([d.text for d in docs])
        if len(scores) != len(docs):
            raise ValueError("perplexity scorer returned wrong count")
        kept = []
        for doc, ppl in zip(docs, scores):
            doc.perplexity = float(ppl)
            if doc.perplexity <= max_perplexity:
                kept.append(doc)
        docs = kept
    after_perplexity = len(docs)

    from .metrics import max_rouge_l
    docs = [d for d in docs
            if max_rouge_l(d.text, reference_texts) <= max_rouge]
    after_rouge = len(docs)

    if len(docs) > cap:
        rng = random.Random(seed)
        keep = sorted(rng.sample(range(len(docs)), cap))
        docs = [docs[i] for i in keep]
    final = len(docs)

    stats = FilterStats(initial, after_dedup, after_perplexity,
                        after_rouge, final)
    return corpus.with_documents(docs), stats


# ---------------------------------------------------------------------------
# Topic coverage and profiling
# ---------------------------------------------------------------------------

def _phrase_pattern(topic: str) -> re.Pattern[str]:
    words = [re.escape(w) for w in topic.split()]
    return re.compile(r"\b" + r"\s+".join(words) + r"\b", re.IGNORECASE)


def count_topic_mentions(texts: Sequence[str],
                         topics: Sequence[str] = TOPICS) -> dict[str, int]:
    """Documents-mentioning-topic counts, whole-word matched."""
    counts = {}
    for topic in topics:
        pattern = _phrase_pattern(topic)
        counts[topic] = sum(1 for t in texts if pattern.search(t))
    return counts


def profile_community(provider, texts: Sequence[str], *, sample_size: int = 50,
                      seed: int = 0, temperature: float = 0.3) -> str:
    """One-sentence summary of what a set of posts is about."""
    if not texts:
        raise ValueError("cannot profile an empty text list")
    rng = random.Random(seed)
    pool = list(texts)
    if len(pool) > sample_size:
        pool = rng.sample(pool, sample_size)
    lines = [_PROFILE_PROMPT, ""]
    lines.extend(f"- {t}" for t in pool)
    out = provider.generate("\n".join(lines), temperature=temperature, count=1)
    return out[0].strip()
