"""Per-community text corpora: cleaning, filtering, curation, deduplication.

A :class:`Corpus` is the unit every later stage works on. Records are stored
as newline-delimited JSON with the fields
``{id, community, text, is_repost, is_reply, author?, perplexity?,
provenance?, topic?}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

PROVENANCES = ("original", "finetuned", "context")

_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)")
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")

# Codepoint blocks covered by the Unicode emoji property, plus the joiners
# and variation selectors that only occur inside emoji sequences.
_EMOJI_RE = re.compile(
    "["
    "\U0001F000-\U0001F0FF"   # mahjong, dominoes, cards
    "\U0001F100-\U0001F1FF"   # enclosed alphanumerics, regional indicators
    "\U0001F300-\U0001F5FF"   # symbols & pictographs
    "\U0001F600-\U0001F64F"   # emoticons
    "\U0001F680-\U0001F6FF"   # transport
    "\U0001F700-\U0001F77F"
    "\U0001F780-\U0001F7FF"
    "\U0001F800-\U0001F8FF"
    "\U0001F900-\U0001F9FF"   # supplemental symbols
    "\U0001FA00-\U0001FAFF"
    "☀-➿"           # misc symbols, dingbats
    "⬀-⯿"
    "←-⇿"           # arrows (common in decorative tweets)
    "︎️"            # variation selectors
    "‍"                  # zero-width joiner
    "⃣"                  # combining keycap
    "❤❣"
    "]+"
)

_WS_RE = re.compile(r"\s+")


@dataclass
class Document:
    """One social post. ``perplexity`` is filled by the curation scorer."""

    id: str
    community: str
    text: str
    author: str | None = None
    is_repost: bool = False
    is_reply: bool = False
    perplexity: float | None = None
    topic: str | None = None

    def __post_init__(self) -> None:
        if self.perplexity is not None and self.perplexity < 0:
            raise ValueError(f"document {self.id}: perplexity must be >= 0")

    def to_record(self, provenance: str | None = None) -> dict:
        rec = {
            "id": self.id,
            "community": self.community,
            "text": self.text,
            "is_repost": self.is_repost,
            "is_reply": self.is_reply,
        }
        if self.author is not None:
            rec["author"] = self.author
        if self.perplexity is not None:
            rec["perplexity"] = self.perplexity
        if self.topic is not None:
            rec["topic"] = self.topic
        if provenance is not None:
            rec["provenance"] = provenance
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Document":
        return cls(
            id=str(rec["id"]),
            community=str(rec.get("community", "")),
            text=rec["text"],
            author=rec.get("author"),
            is_repost=bool(rec.get("is_repost", False)),
            is_reply=bool(rec.get("is_reply", False)),
            perplexity=rec.get("perplexity"),
            topic=rec.get("topic"),
        )


@dataclass
class Corpus:
    """An ordered document collection for a single community.

    ``provenance`` distinguishes the human-written corpus ("original") from
    its synthetic counterparts ("finetuned", "context").
    """

    community: str
    documents: list[Document] = field(default_factory=list)
    provenance: str = "original"

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        seen: set[str] = set()
        for doc in self.documents:
            if doc.community != self.community:
                raise ValueError(
                    f"document {doc.id} tagged {doc.community!r}, "
                    f"corpus is {self.community!r}"
                )
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    def with_documents(self, documents: list[Document]) -> "Corpus":
        return Corpus(self.community, documents, self.provenance)


def clean_text(raw: str, lowercase: bool = False,
               extra_patterns: Sequence[str] = ()) -> str:
    """Strip URLs, @-mentions, whole #hashtag tokens, and emoji from a post.

    Whitespace is collapsed and trimmed. Letter case is preserved unless
    ``lowercase`` is set. ``extra_patterns`` are regexes for platform
    artifacts to remove on top of the defaults. May return "" (callers drop
    empty documents).
    """
    text = _URL_RE.sub(" ", raw)
    text = _MENTION_RE.sub(" ", text)
    text = _HASHTAG_RE.sub(" ", text)
    text = _EMOJI_RE.sub(" ", text)
    for pat in extra_patterns:
        text = re.sub(pat, " ", text)
    text = _WS_RE.sub(" ", text).strip()
    if lowercase:
        text = text.lower()
    return text


def filter_originals(docs: Sequence[Document]) -> list[Document]:
    """Keep only documents that are neither reposts nor replies, in order."""
    return [d for d in docs if not d.is_repost and not d.is_reply]


def curate(corpus: Corpus, scorer: Callable[[Sequence[str]], Sequence[float]],
           cap: int = 10_000) -> Corpus:
    """Keep the ``cap`` lowest-perplexity documents of a corpus.

    ``scorer`` maps a list of texts to one perplexity per text (a provider's
    ``perplexity`` method fits directly). Every retained document carries its
    score. Ties break by document id ascending so runs are reproducible.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    if not corpus.documents:
        return corpus.with_documents([])
    scores = scorer(corpus.texts())
    if len(scores) != len(corpus.documents):
        raise ValueError(
            f"scorer returned {len(scores)} scores for "
            f"{len(corpus.documents)} documents"
        )
    scored = [replace(d, perplexity=float(s))
              for d, s in zip(corpus.documents, scores)]
    scored.sort(key=lambda d: (d.perplexity, d.id))
    return corpus.with_documents(scored[:cap])


def dedup_exact(corpus: Corpus) -> Corpus:
    """Drop later documents whose text exactly matches an earlier one."""
    seen: set[str] = set()
    kept = []
    for doc in corpus.documents:
        if doc.text in seen:
            continue
        seen.add(doc.text)
        kept.append(doc)
    return corpus.with_documents(kept)


# ---------------------------------------------------------------------------
# Record IO
# ---------------------------------------------------------------------------

def read_records(path: str | Path) -> list[dict]:
    """Read newline-delimited JSON records, reporting the first bad line."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: bad record at line {lineno}: {exc}") from exc
            if not isinstance(rec, dict):
                raise ValueError(f"{path}: bad record at line {lineno}: not an object")
            records.append(rec)
    return records


def read_documents(path: str | Path) -> list[Document]:
    docs = []
    for lineno, rec in enumerate(read_records(path), start=1):
        try:
            docs.append(Document.from_record(rec))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: bad record at line {lineno}: {exc}") from exc
    return docs


def write_documents(path: str | Path, docs: Iterable[Document],
                    provenance: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_record(provenance), ensure_ascii=False))
            fh.write("\n")


def write_corpus(path: str | Path, corpus: Corpus) -> None:
    write_documents(path, corpus.documents, provenance=corpus.provenance)


def read_corpus(path: str | Path, community: str | None = None,
                provenance: str | None = None) -> Corpus:
    """Load a corpus file written by :func:`write_corpus`.

    ``community``/``provenance`` default to the values found in the records;
    the file must be homogeneous in both.
    """
    docs = read_documents(path)
    recs = read_records(path)
    if community is None:
        communities = {d.community for d in docs}
        if len(communities) != 1:
            raise ValueError(f"{path}: expected one community, got {sorted(communities)}")
        community = communities.pop()
    if provenance is None:
        tags = {r.get("provenance", "original") for r in recs}
        if len(tags) != 1:
            raise ValueError(f"{path}: mixed provenance tags {sorted(tags)}")
        provenance = tags.pop()
    return Corpus(community, docs, provenance)


def group_by_community(docs: Iterable[Document],
                       provenance: str = "original") -> dict[str, Corpus]:
    """Split a mixed document list into one corpus per community tag."""
    buckets: dict[str, list[Document]] = {}
    for doc in docs:
        buckets.setdefault(doc.community, []).append(doc)
    return {c: Corpus(c, ds, provenance) for c, ds in sorted(buckets.items())}
