import json
import subprocess
import sys

import pytest

from modeladapter import DemonstrationError, TextGenerator, finetune
from modeladapter.finetune import read_demonstrations
from modeladapter.textgen import bundled_corpus

INSTRUCTIONS = [
    "Write a post in the voice of this community.",
    "Reply to a newcomer asking for advice.",
    "Share a short update about your week.",
    "Describe what this community cares about.",
]


def _write_demos(path, n=100):
    """Instruction/output pairs built from the bundled training lines."""
    lines = bundled_corpus()
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n):
            fh.write(json.dumps({
                "instruction": INSTRUCTIONS[i % len(INSTRUCTIONS)],
                "input": "",
                "output": lines[i % len(lines)],
            }) + "\n")
    return path


def test_read_demonstrations_roundtrip(tmp_path):
    demos = read_demonstrations(_write_demos(tmp_path / "demos.jsonl", n=12))
    assert len(demos) == 12
    assert demos[0]["instruction"] == INSTRUCTIONS[0]
    assert demos[0]["output"]


def test_read_demonstrations_lists_bad_line_numbers(tmp_path):
    path = tmp_path / "demos.jsonl"
    path.write_text("\n".join([
        json.dumps({"instruction": "a", "output": "b"}),
        "{not json",
        json.dumps({"instruction": "", "output": "b"}),
        json.dumps(["not", "an", "object"]),
        json.dumps({"instruction": "a", "output": "b", "input": 3}),
    ]) + "\n")
    with pytest.raises(DemonstrationError) as err:
        read_demonstrations(path)
    msg = str(err.value)
    assert ":2:" in msg and ":3:" in msg and ":4:" in msg and ":5:" in msg
    assert ":1:" not in msg


def test_read_demonstrations_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("\n\n")
    with pytest.raises(DemonstrationError, match="no demonstrations"):
        read_demonstrations(path)


def test_finetune_hundred_demos_loss_decreases(tmp_path, base_model_dir):
    demos = _write_demos(tmp_path / "demos.jsonl", n=100)
    out_dir = tmp_path / "adapted"
    report = finetune(demos, str(base_model_dir), out_dir, epochs=1)
    assert report["demonstrations"] == 100
    assert report["steps"] == len(report["losses"]) > 1
    # first logged step to last logged step, one epoch is enough
    assert report["final_loss"] < report["first_loss"]
    for name in ("model.pt", "vocab.json", "meta.json"):
        assert (out_dir / name).exists()


def test_adapted_model_answers_an_instruction(tmp_path, base_model_dir):
    demos = _write_demos(tmp_path / "demos.jsonl", n=100)
    out_dir = tmp_path / "adapted"
    finetune(demos, str(base_model_dir), out_dir, epochs=1)
    adapted = TextGenerator.load(out_dir)
    (answer,) = adapted.generate(INSTRUCTIONS[0], temperature=0.7,
                                 max_tokens=40)
    assert answer.strip()
    assert adapted.meta["adapted_from"]


def test_finetune_is_deterministic(tmp_path, base_model_dir):
    demos = _write_demos(tmp_path / "demos.jsonl", n=24)
    a = finetune(demos, str(base_model_dir), tmp_path / "a", epochs=1, seed=3)
    b = finetune(demos, str(base_model_dir), tmp_path / "b", epochs=1, seed=3)
    assert a["losses"] == b["losses"]


def test_finetune_extends_vocabulary(tmp_path, base_model_dir):
    # demonstration text introduces words the base has never seen
    path = tmp_path / "demos.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(8):
            fh.write(json.dumps({
                "instruction": "Describe the zorblat festival.",
                "output": "the zorblat festival needs quxbright lanterns",
            }) + "\n")
    out_dir = tmp_path / "adapted"
    finetune(path, str(base_model_dir), out_dir, epochs=2)
    base = TextGenerator.load(base_model_dir)
    adapted = TextGenerator.load(out_dir)
    assert len(adapted.vocab) > len(base.vocab)
    assert "zorblat" in adapted.vocab.words


def test_finetune_missing_base_names_it(tmp_path):
    demos = _write_demos(tmp_path / "demos.jsonl", n=4)
    with pytest.raises(DemonstrationError, match="not-a-model"):
        finetune(demos, str(tmp_path / "not-a-model"), tmp_path / "out")


def test_cli_finetune_roundtrip(tmp_path, base_model_dir):
    demos = _write_demos(tmp_path / "demos.jsonl", n=20)
    out_dir = tmp_path / "cli-adapted"
    proc = subprocess.run(
        [sys.executable, "-m", "modeladapter", "finetune",
         "--demos", str(demos), "--base", str(base_model_dir),
         "--out", str(out_dir), "--epochs", "1"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "adapted on 20 demonstrations" in proc.stdout
    assert (out_dir / "model.pt").exists()


def test_cli_finetune_reports_bad_demos(tmp_path, base_model_dir):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"instruction": "a"}\n')
    proc = subprocess.run(
        [sys.executable, "-m", "modeladapter", "finetune",
         "--demos", str(path), "--base", str(base_model_dir),
         "--out", str(tmp_path / "out")],
        capture_output=True, text=True)
    assert proc.returncode == 1
    assert ":1:" in proc.stderr
