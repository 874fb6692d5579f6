import pytest

from commtwin.providers import MockProvider
from commtwin.screen import (BEHAVIOR_KEYS, DEFAULT_FREQUENCY_BANDS,
                             PROMPT_INSTRUCTION, SWED_ITEMS, WCS_KEYS, Item,
                             ItemResult, administer, build_swed, endorsed,
                             parse_response, render_prompt, risk_criteria,
                             score_answers, screen_community,
                             screening_report, wcs_score)

BY_KEY = {item.key: item for item in SWED_ITEMS}


# ---------------------------------------------------------------------------
# Instrument structure
# ---------------------------------------------------------------------------

def test_instrument_has_fourteen_items_in_order():
    keys = [item.key for item in SWED_ITEMS]
    assert keys == ["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8", "q9",
                    "q10", "q11a", "q11b", "q11c", "q11d"]


def test_option_counts():
    counts = {k: len(BY_KEY[k].options) for k in BY_KEY}
    assert counts["q1"] == 3
    assert counts["q5"] == 5 and counts["q6"] == 5 and counts["q9"] == 5
    assert counts["q7"] == 7
    assert counts["q8"] == 4
    for key in ("q2", "q3", "q4", "q10"):
        assert counts[key] == 0 and not BY_KEY[key].is_choice
    for key in BEHAVIOR_KEYS:
        assert BY_KEY[key].options == DEFAULT_FREQUENCY_BANDS


def test_behavior_items_share_question_prefix():
    prefix = "In the past 3 months, how many times have you done the following"
    for key in BEHAVIOR_KEYS:
        assert BY_KEY[key].text.startswith(prefix)


def test_build_swed_custom_bands():
    bands = ("never", "once", "twice", "weekly", "daily")
    items = {i.key: i for i in build_swed(bands)}
    assert items["q11a"].options == bands
    assert items["q11a"].letters() == ("a", "b", "c", "d", "e")
    with pytest.raises(ValueError):
        build_swed(("only one",))


def test_render_prompt_choice_item():
    prompt = render_prompt(BY_KEY["q8"])
    lines = prompt.split("\n")
    assert lines[0].startswith("Compared to other things in your life")
    assert lines[1].startswith("a) ")
    assert lines[4].startswith("d) My weight is the most important thing")
    assert lines[-1] == PROMPT_INSTRUCTION


def test_render_prompt_numeric_item_has_no_options():
    prompt = render_prompt(BY_KEY["q3"])
    assert prompt == ("What is your current weight in pounds?\n"
                      + PROMPT_INSTRUCTION)


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("reply,expected", [
    ("a", "a"),
    ("b)", "b"),
    ("C.", "c"),
    ("(b", "b"),
    ("  c: because I worry a lot", "c"),
    ("e", "e"),
    ("f", None),           # out of range for a 5-option item
    ("z) something", None),
    ("42", None),          # numbers are not option letters
    ("I would rather not answer", None),
    ("", None),
])
def test_parse_choice_responses(reply, expected):
    assert parse_response(BY_KEY["q5"], reply) == expected


@pytest.mark.parametrize("reply,expected", [
    ("120", "120"),
    ("about 120 pounds", "120"),
    ("120.5", "120.5"),
    ("120.0", "120"),
    ("-5", None),
    ("none of your business", None),
    ("", None),
])
def test_parse_numeric_responses(reply, expected):
    assert parse_response(BY_KEY["q3"], reply) == expected


def test_majority_breaks_choice_ties_toward_earliest_option():
    result = ItemResult("q5")
    result.votes.update({"c": 3, "b": 3, "e": 1})
    assert result.majority(BY_KEY["q5"]) == "b"


def test_majority_breaks_numeric_ties_toward_smallest_value():
    result = ItemResult("q3")
    result.votes.update({"100": 2, "90": 2})
    # numeric comparison, not lexicographic ("100" < "90" as strings)
    assert result.majority(BY_KEY["q3"]) == "90"


def test_majority_requires_at_least_one_vote():
    with pytest.raises(ValueError, match="no parseable responses"):
        ItemResult("q5").majority(BY_KEY["q5"])


# ---------------------------------------------------------------------------
# Administration
# ---------------------------------------------------------------------------

class ScriptedRespondent:
    """Deterministic per-index replies; every fourth reply is unusable."""

    def __init__(self):
        self.calls = 0

    def generate(self, prompt, *, temperature=1.0, count=1, max_tokens=None):
        self.calls += 1
        choice = "only with the letter" in prompt and ") " in prompt
        replies = []
        for i in range(count):
            if i % 4 == 3:
                replies.append("I would rather talk about something else.")
            elif choice:
                replies.append("ab"[i % 2])
            else:
                replies.append(str(100 + i))
        return replies


def test_administer_retries_until_sample_quota_met():
    provider = ScriptedRespondent()
    items = (BY_KEY["q5"], BY_KEY["q3"])
    results = administer(provider, items, samples=8, retry_rounds=3)
    for key in ("q5", "q3"):
        assert sum(results[key].votes.values()) == 8
        assert results[key].invalid == 2
    # two rounds per item: 8 drawn, 2 garbled, then 2 replacements
    assert provider.calls == 4


def test_administer_extends_the_same_completion_sequence():
    class CountTracker(ScriptedRespondent):
        def __init__(self):
            super().__init__()
            self.counts = []

        def generate(self, prompt, *, temperature=1.0, count=1,
                     max_tokens=None):
            self.counts.append(count)
            return super().generate(prompt, temperature=temperature,
                                    count=count, max_tokens=max_tokens)

    provider = CountTracker()
    administer(provider, (BY_KEY["q5"],), samples=8, retry_rounds=3)
    # second request re-asks for the full prefix plus the replacements
    assert provider.counts == [8, 10]


def test_administer_gives_up_after_retry_budget():
    class Unusable:
        def generate(self, prompt, *, temperature=1.0, count=1,
                     max_tokens=None):
            return ["no comment"] * count

    results = administer(Unusable(), (BY_KEY["q5"],), samples=4,
                         retry_rounds=2)
    assert not results["q5"].votes
    assert results["q5"].invalid == 12  # 4 + 4 + 4 across three rounds
    with pytest.raises(ValueError):
        results["q5"].majority(BY_KEY["q5"])


def test_screen_community_with_mock_provider():
    result = screen_community(MockProvider(seed=7), "mockers", samples=20,
                              retry_rounds=3)
    assert result.community == "mockers"
    assert set(result.answers) == set(BY_KEY)
    for key in ("q5", "q6", "q7", "q8", "q9"):
        assert result.answers[key] in BY_KEY[key].letters()
    assert float(result.answers["q3"]) >= 0
    assert 0.0 <= result.wcs <= 100.0


# ---------------------------------------------------------------------------
# Scoring rules
# ---------------------------------------------------------------------------

def test_wcs_maps_each_item_onto_0_100():
    lowest = {k: "a" for k in WCS_KEYS}
    highest = {"q5": "e", "q6": "e", "q7": "g", "q8": "d", "q9": "e"}
    assert wcs_score(lowest) == 0.0
    assert wcs_score(highest) == 100.0
    # single step on q8 (4 options): 100/3 averaged over five items
    one_step = dict(lowest, q8="b")
    assert wcs_score(one_step) == pytest.approx(100.0 / 3 / 5)


def test_wcs_rejects_non_option_answers():
    answers = {k: "a" for k in WCS_KEYS}
    answers["q7"] = "z"
    with pytest.raises(ValueError, match="q7"):
        wcs_score(answers)


def test_endorsement_means_any_nonzero_band():
    item = BY_KEY["q11a"]
    assert not endorsed(item, "a")
    assert endorsed(item, "b")
    assert endorsed(item, "c")


def test_risk_criteria_thresholds():
    base = {"q6": "a", "q8": "a", "q11a": "a", "q11b": "a", "q11c": "a",
            "q11d": "a"}
    assert risk_criteria(base) == {"c2": False, "c3": False, "c4": False}
    assert risk_criteria(dict(base, q8="c"))["c2"] is True
    assert risk_criteria(dict(base, q8="b"))["c2"] is False
    assert risk_criteria(dict(base, q6="c"))["c3"] is True
    assert risk_criteria(dict(base, q6="b"))["c3"] is False
    two = dict(base, q11a="b", q11b="c")
    assert risk_criteria(two)["c4"] is False
    three = dict(two, q11c="b")
    assert risk_criteria(three)["c4"] is True


# ---------------------------------------------------------------------------
# Reference answer profiles
#
# Hand-scored majority answers from six screened communities, kept as
# regression fixtures for the scoring rules. Expected values below are
# derived from the scoring definitions alone.
# ---------------------------------------------------------------------------

REFERENCE_PROFILES = {
    "pro-eating-disorder": {"q5": "b", "q6": "c", "q7": "c", "q8": "c",
                            "q9": "c", "q11a": "c", "q11b": "c", "q11c": "a",
                            "q11d": "a"},
    "keto": {"q5": "c", "q6": "c", "q7": "a", "q8": "c", "q9": "a",
             "q11a": "a", "q11b": "a", "q11c": "b", "q11d": "b"},
    "body-image": {"q5": "b", "q6": "a", "q7": "b", "q8": "b", "q9": "a",
                   "q11a": "a", "q11b": "a", "q11c": "b", "q11d": "b"},
    "anti-eating-disorder": {"q5": "a", "q6": "c", "q7": "b", "q8": "a",
                             "q9": "a", "q11a": "c", "q11b": "c", "q11c": "b",
                             "q11d": "b"},
    "healthy-lifestyle": {"q5": "a", "q6": "a", "q7": "a", "q8": "c",
                          "q9": "a", "q11a": "a", "q11b": "a", "q11c": "b",
                          "q11d": "b"},
    "weight-loss-drugs": {"q5": "b", "q6": "b", "q7": "a", "q8": "b",
                          "q9": "a", "q11a": "a", "q11b": "a", "q11c": "a",
                          "q11d": "a"},
}

# (wcs to one decimal, c2, c3, c4) as the stated rules score each profile
RULE_SCORES = {
    "pro-eating-disorder": (45.0, True, True, False),
    "keto": (33.3, True, True, False),
    "body-image": (15.0, False, False, False),
    "anti-eating-disorder": (13.3, False, True, True),
    "healthy-lifestyle": (13.3, True, False, False),
    "weight-loss-drugs": (16.7, False, False, False),
}


@pytest.mark.parametrize("community", sorted(REFERENCE_PROFILES))
def test_reference_profiles_score_per_the_rules(community):
    result = score_answers(community, REFERENCE_PROFILES[community])
    wcs, c2, c3, c4 = RULE_SCORES[community]
    assert round(result.wcs, 1) == wcs
    assert (result.c2, result.c3, result.c4) == (c2, c3, c4)


def test_screening_report_orders_by_concern_then_name():
    results = [score_answers(c, a) for c, a in REFERENCE_PROFILES.items()]
    rows = screening_report(results)
    names = [r["community"] for r in rows]
    assert names == ["pro-eating-disorder", "keto", "weight-loss-drugs",
                     "body-image", "anti-eating-disorder",
                     "healthy-lifestyle"]
    wcs = [r["wcs"] for r in rows]
    assert wcs == sorted(wcs, reverse=True)


def test_score_answers_round_trip_dict():
    result = score_answers("keto", REFERENCE_PROFILES["keto"])
    d = result.as_dict()
    assert d["community"] == "keto"
    assert d["answers"]["q8"] == "c"
    assert isinstance(d["wcs"], float)
    assert set(d) == {"community", "answers", "wcs", "c2", "c3", "c4",
                      "invalid_responses"}
