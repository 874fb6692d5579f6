"""Adapt the generator to a demonstration file.

Demonstrations are newline-delimited JSON records {instruction, input,
output}. The whole file is validated up front; any bad record aborts with
its line number before training starts.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch

from .textgen import BOS, EOS, SEP, TextGenerator, train_lm


class DemonstrationError(ValueError):
    pass


def read_demonstrations(path: str | Path) -> list[dict]:
    records = []
    problems = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append(f"{path}:{lineno}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(record, dict):
                problems.append(f"{path}:{lineno}: record must be an object")
                continue
            for field in ("instruction", "output"):
                value = record.get(field)
                if not isinstance(value, str) or not value.strip():
                    problems.append(
                        f"{path}:{lineno}: missing or empty {field!r}")
                    break
            else:
                record.setdefault("input", "")
                if not isinstance(record["input"], str):
                    problems.append(f"{path}:{lineno}: 'input' must be a "
                                    f"string")
                    continue
                records.append(record)
    if problems:
        raise DemonstrationError("\n".join(problems))
    if not records:
        raise DemonstrationError(f"{path}: no demonstrations found")
    return records


def resolve_base(base: str) -> TextGenerator:
    """'tiny-base' trains the bundled model; anything else is a saved dir."""
    if base == "tiny-base":
        return TextGenerator.train_base()
    try:
        return TextGenerator.load(base)
    except FileNotFoundError as exc:
        raise DemonstrationError(f"base model {base!r}: {exc}") from None


def finetune(demos_path: str | Path, base: str, out_dir: str | Path, *,
             epochs: int = 3, batch_size: int = 8, lr: float = 1e-2,
             seed: int = 0) -> dict:
    """Continue training the base generator on demonstrations.

    The vocab is extended to cover the demonstrations; training predicts
    the full instruction/response sequence. Returns the loss history and
    writes the adapted model to out_dir.
    """
    records = read_demonstrations(demos_path)
    torch.manual_seed(seed)
    generator = resolve_base(base)

    texts = [f"{r['instruction']} {r['input']} {r['output']}"
             for r in records]
    generator = generator.with_extended_vocab(texts)
    vocab = generator.vocab
    sequences = []
    for r in records:
        prompt = r["instruction"] if not r["input"] \
            else f"{r['instruction']} {r['input']}"
        sequences.append([BOS, *vocab.encode(prompt), SEP,
                          *vocab.encode(r["output"]), EOS])

    history = train_lm(generator.model, sequences, epochs=epochs,
                       batch_size=batch_size, lr=lr, seed=seed)
    generator.meta.update({
        "kind": "tiny-gru",
        "adapted_from": base,
        "demonstrations": len(records),
        "epochs": epochs,
        "steps": len(history),
        "first_loss": history[0],
        "final_loss": history[-1],
    })
    generator.save(out_dir)
    return {
        "output_dir": str(out_dir),
        "demonstrations": len(records),
        "steps": len(history),
        "losses": history,
        "first_loss": history[0],
        "final_loss": history[-1],
    }
