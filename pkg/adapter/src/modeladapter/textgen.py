"""Word-level causal language model for desk-scale generation.

A single-layer GRU over a small word vocabulary. It trains from scratch on
the bundled corpus in a few seconds of CPU time, which is the whole point:
the service and the finetuning path can be exercised end to end with no
model downloads. The wire behavior (prompt in, completions out) is the same
one a real instruction-tuned model would sit behind.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from collections import Counter
from pathlib import Path
from typing import Callable, Sequence

import torch
from torch import nn
from torch.nn.utils.rnn import pad_sequence

_TOKEN_RE = re.compile(r"[a-z0-9']+")

# Special token ids stay fixed so saved models remain loadable.
PAD, BOS, SEP, EOS, UNK = range(5)
_SPECIALS = ("<pad>", "<bos>", "<sep>", "<eos>", "<unk>")

_DATA_DIR = Path(__file__).parent / "data"


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def bundled_corpus() -> list[str]:
    path = _DATA_DIR / "base_corpus.txt"
    return [line.strip() for line in path.read_text(encoding="utf-8")
            .splitlines() if line.strip()]


class Vocab:
    """Fixed word list; index 0-4 are the special tokens."""

    def __init__(self, words: Sequence[str]):
        self.words = _SPECIALS + tuple(words)
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_texts(cls, texts: Sequence[str], max_size: int = 8000) -> "Vocab":
        counts = Counter(tok for text in texts for tok in tokenize(text))
        ranked = sorted(counts, key=lambda w: (-counts[w], w))
        return cls(ranked[: max_size - len(_SPECIALS)])

    def encode(self, text: str) -> list[int]:
        return [self.index.get(tok, UNK) for tok in tokenize(text)]

    def decode(self, ids: Sequence[int]) -> str:
        return " ".join(self.words[i] for i in ids if i >= len(_SPECIALS))

    def extended(self, texts: Sequence[str]) -> "Vocab":
        """Same vocab plus any new words found in texts, appended in rank
        order so existing ids keep their meaning."""
        counts = Counter(tok for text in texts for tok in tokenize(text)
                         if tok not in self.index)
        new = sorted(counts, key=lambda w: (-counts[w], w))
        return Vocab(tuple(self.words[len(_SPECIALS):]) + tuple(new))


class TinyLM(nn.Module):
    def __init__(self, vocab_size: int, embed_dim: int = 64,
                 hidden_dim: int = 128):
        super().__init__()
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.embed = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD)
        self.rnn = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def forward(self, ids: torch.Tensor, state: torch.Tensor | None = None):
        hidden, state = self.rnn(self.embed(ids), state)
        return self.out(hidden), state


def train_lm(model: TinyLM, sequences: Sequence[Sequence[int]], *,
             epochs: int, batch_size: int, lr: float, seed: int,
             log: Callable[[int, float], None] | None = None) -> list[float]:
    """Next-token training; returns the per-step loss history."""
    if not sequences:
        raise ValueError("no training sequences")
    tensors = [torch.tensor(s, dtype=torch.long) for s in sequences]
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    rng = random.Random(seed)
    history: list[float] = []
    model.train()
    for _ in range(epochs):
        order = list(range(len(tensors)))
        rng.shuffle(order)
        for start in range(0, len(order), batch_size):
            batch = [tensors[i] for i in order[start:start + batch_size]]
            ids = pad_sequence(batch, batch_first=True, padding_value=PAD)
            logits, _ = model(ids[:, :-1])
            loss = loss_fn(logits.reshape(-1, logits.shape[-1]),
                           ids[:, 1:].reshape(-1))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            history.append(float(loss.detach()))
            if log:
                log(len(history), history[-1])
    model.eval()
    return history


def _request_seed(prompt: str, temperature: float, max_tokens: int,
                  index: int) -> int:
    key = f"{prompt}\x1f{round(temperature, 6)}\x1f{max_tokens}\x1f{index}"
    return int.from_bytes(
        hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "big")


class TextGenerator:
    """A TinyLM plus its vocab, with prompt-conditioned sampling."""

    MIN_WORDS = 3  # eos is masked until this many words are out

    def __init__(self, model: TinyLM, vocab: Vocab,
                 meta: dict | None = None):
        self.model = model
        self.vocab = vocab
        self.meta = meta or {}
        self.model.eval()

    @classmethod
    def train_base(cls, lines: Sequence[str] | None = None, *, seed: int = 0,
                   epochs: int = 6, batch_size: int = 16,
                   lr: float = 5e-3) -> "TextGenerator":
        lines = list(lines) if lines is not None else bundled_corpus()
        torch.manual_seed(seed)
        vocab = Vocab.from_texts(lines)
        sequences = [[BOS] + vocab.encode(line) + [EOS] for line in lines]
        model = TinyLM(len(vocab))
        history = train_lm(model, sequences, epochs=epochs,
                           batch_size=batch_size, lr=lr, seed=seed)
        meta = {"kind": "tiny-gru", "trained_lines": len(lines),
                "steps": len(history), "final_loss": history[-1]}
        return cls(model, vocab, meta)

    def generate(self, prompt: str, *, temperature: float = 1.0,
                 count: int = 1, max_tokens: int = 60) -> list[str]:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        if count < 1:
            raise ValueError("count must be >= 1")
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        max_tokens = max(self.MIN_WORDS, int(max_tokens))
        prefix = torch.tensor([[BOS, *self.vocab.encode(prompt), SEP]],
                              dtype=torch.long)
        outputs = []
        with torch.no_grad():
            for i in range(count):
                gen = torch.Generator()
                gen.manual_seed(_request_seed(prompt, temperature,
                                              max_tokens, i))
                logits, state = self.model(prefix)
                step_logits = logits[0, -1]
                words: list[int] = []
                while len(words) < max_tokens:
                    masked = step_logits.clone()
                    masked[[PAD, BOS, SEP, UNK]] = float("-inf")
                    if len(words) < self.MIN_WORDS:
                        masked[EOS] = float("-inf")
                    if temperature < 1e-4:
                        token = int(masked.argmax())
                    else:
                        probs = torch.softmax(masked / temperature, dim=-1)
                        token = int(torch.multinomial(probs, 1,
                                                      generator=gen))
                    if token == EOS:
                        break
                    words.append(token)
                    step = torch.tensor([[token]], dtype=torch.long)
                    logits, state = self.model(step, state)
                    step_logits = logits[0, -1]
                outputs.append(self.vocab.decode(words))
        return outputs

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        torch.save({"state": self.model.state_dict(),
                    "vocab_size": len(self.vocab),
                    "embed_dim": self.model.embed_dim,
                    "hidden_dim": self.model.hidden_dim}, out / "model.pt")
        with open(out / "vocab.json", "w", encoding="utf-8") as fh:
            json.dump(list(self.vocab.words[len(_SPECIALS):]), fh)
        with open(out / "meta.json", "w", encoding="utf-8") as fh:
            json.dump(self.meta, fh, indent=2)

    @classmethod
    def load(cls, model_dir: str | Path) -> "TextGenerator":
        path = Path(model_dir)
        for required in ("model.pt", "vocab.json"):
            if not (path / required).exists():
                raise FileNotFoundError(f"{path}: missing {required}")
        with open(path / "vocab.json", encoding="utf-8") as fh:
            vocab = Vocab(json.load(fh))
        blob = torch.load(path / "model.pt", weights_only=True)
        model = TinyLM(blob["vocab_size"], blob["embed_dim"],
                       blob["hidden_dim"])
        model.load_state_dict(blob["state"])
        meta = {}
        if (path / "meta.json").exists():
            with open(path / "meta.json", encoding="utf-8") as fh:
                meta = json.load(fh)
        return cls(model, vocab, meta)

    def with_extended_vocab(self, texts: Sequence[str]) -> "TextGenerator":
        """Copy of this generator whose vocab also covers texts; existing
        embedding and output rows carry over, new rows start fresh."""
        vocab = self.vocab.extended(texts)
        if len(vocab) == len(self.vocab):
            return self
        grown = TinyLM(len(vocab), self.model.embed_dim,
                       self.model.hidden_dim)
        old = len(self.vocab)
        with torch.no_grad():
            grown.embed.weight[:old] = self.model.embed.weight
            grown.out.weight[:old] = self.model.out.weight
            grown.out.bias[:old] = self.model.out.bias
            grown.rnn.load_state_dict(self.model.rnn.state_dict())
        return TextGenerator(grown, vocab, dict(self.meta))
