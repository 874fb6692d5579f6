import json

import pytest

from commtwin.corpus import Corpus, Document
from commtwin.demos import (INSTRUCTION_POOL, Demonstration,
                            augment_with_general, build_demonstrations,
                            export_demonstrations, read_demonstrations,
                            topicalize)


def _corpus(n=30):
    docs = [Document(id=f"d{i}", community="c", text=f"post number {i}")
            for i in range(n)]
    return Corpus("c", docs)


def test_pool_has_twenty_distinct_instructions():
    assert len(INSTRUCTION_POOL) == 20
    assert len(set(INSTRUCTION_POOL)) == 20


def test_build_one_demo_per_document_with_verbatim_response():
    corpus = _corpus()
    demos = build_demonstrations(corpus, seed=0)
    assert len(demos) == len(corpus)
    assert [d.response for d in demos] == corpus.texts()
    assert all(d.instruction in INSTRUCTION_POOL for d in demos)
    assert all(d.input == "" for d in demos)


def test_build_demonstrations_seeded():
    corpus = _corpus()
    assert build_demonstrations(corpus, seed=7) == \
        build_demonstrations(corpus, seed=7)
    # different seed should reshuffle template picks for 30 docs
    a = [d.instruction for d in build_demonstrations(corpus, seed=1)]
    b = [d.instruction for d in build_demonstrations(corpus, seed=2)]
    assert a != b


def test_build_demonstrations_uses_wide_template_spread():
    demos = build_demonstrations(_corpus(400), seed=0)
    used = {d.instruction for d in demos}
    assert len(used) == 20


def test_topicalize_moves_terminal_punctuation():
    assert topicalize("What would you tweet?", "fasting") == \
        "What would you tweet about fasting?"
    assert topicalize("Tweet something.", "keto") == \
        "Tweet something about keto."


def test_topicalize_without_terminal_mark():
    assert topicalize("Say it", "x") == "Say it about x"


def test_topicalize_rejects_empty_topic():
    with pytest.raises(ValueError):
        topicalize("What would you tweet?", "")


def test_build_demonstrations_with_topic():
    demos = build_demonstrations(_corpus(5), seed=0, topic="fasting")
    assert all("about fasting" in d.instruction for d in demos)


def test_demonstration_rejects_empty_fields():
    with pytest.raises(ValueError):
        Demonstration(instruction="", input="", response="x")
    with pytest.raises(ValueError):
        Demonstration(instruction="i", input="", response="")


def test_export_import_roundtrip(tmp_path):
    demos = build_demonstrations(_corpus(10), seed=0)
    path = tmp_path / "demos.jsonl"
    export_demonstrations(demos, path)
    assert read_demonstrations(path) == demos
    # wire format: instruction/input/output
    first = json.loads(path.read_text().splitlines()[0])
    assert set(first) == {"instruction", "input", "output"}


def test_export_keeps_unicode_readable(tmp_path):
    demos = [Demonstration(instruction="Tweet something.", input="",
                           response="crème brûlée")]
    path = tmp_path / "demos.jsonl"
    export_demonstrations(demos, path)
    assert "crème brûlée" in path.read_text(encoding="utf-8")


def test_read_demonstrations_reports_first_bad_line(tmp_path):
    path = tmp_path / "demos.jsonl"
    ok = json.dumps({"instruction": "i", "input": "", "output": "o"})
    path.write_text(ok + "\n" + json.dumps({"instruction": "i"}) + "\n")
    with pytest.raises(ValueError, match=r":2:"):
        read_demonstrations(path)


def test_read_demonstrations_rejects_non_object(tmp_path):
    path = tmp_path / "demos.jsonl"
    path.write_text("[1, 2]\n")
    with pytest.raises(ValueError, match=r":1:"):
        read_demonstrations(path)


def test_augment_with_general_fraction(tmp_path):
    general = [Demonstration(instruction=f"general {i}", input="",
                             response=f"answer {i}") for i in range(50)]
    path = tmp_path / "general.jsonl"
    export_demonstrations(general, path)
    demos = build_demonstrations(_corpus(40), seed=0)
    merged = augment_with_general(demos, path, fraction=0.1, seed=0)
    assert len(merged) == 44
    assert merged[:40] == demos
    assert all(m.instruction.startswith("general") for m in merged[40:])
    # seeded: same pick every time
    assert merged == augment_with_general(demos, path, fraction=0.1, seed=0)


def test_augment_caps_at_pool_size(tmp_path):
    general = [Demonstration(instruction="g", input="", response="a")]
    path = tmp_path / "general.jsonl"
    export_demonstrations(general, path)
    demos = build_demonstrations(_corpus(40), seed=0)
    merged = augment_with_general(demos, path, fraction=0.5, seed=0)
    assert len(merged) == 41


def test_augment_rejects_bad_fraction(tmp_path):
    with pytest.raises(ValueError):
        augment_with_general([], tmp_path / "none.jsonl", fraction=1.5, seed=0)
