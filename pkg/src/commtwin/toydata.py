"""Small deterministic dataset for offline runs and smoke tests.

Six communities, 200 posts each, 30 users each. Every community has its own
word pool plus a shared filler pool, and its users retweet each other far
more often than they retweet outsiders, so community detection on the
interaction graph recovers the six groups.
"""

from __future__ import annotations

import random
from pathlib import Path

from .config import (CurationSettings, EvaluationSettings, GenerationSettings,
                     FilterSettings, RunConfig, ScreeningSettings)
from .corpus import Document, write_documents
from .synthgen import TOPICS

COMMUNITIES = ("aurora", "bistro", "cascade", "drift", "ember", "fable")

_SHARED = ("today the feeling again honestly never always people think about "
           "when after before because really little").split()

_POOLS = {
    "aurora": ("scale goal thin mirror fasting collarbone restrict intake "
               "hunger discipline thinspo bones").split(),
    "bistro": ("keto carbs recipe butter protein ketosis macros bacon "
               "electrolytes avocado fasting lowcarb").split(),
    "cascade": ("ozempic wegovy dose injection shortage prescription insurance "
                "semaglutide pharmacy refill appetite pounds").split(),
    "drift": ("body positivity acceptance curves beautiful worth confidence "
              "standards media unrealistic love shape").split(),
    "ember": ("recovery healing therapist meals nourish relapse support "
              "warrior freedom gentle progress hope").split(),
    "fable": ("workout steps jogging hydration sleep routine strength "
              "mobility stretching consistency coach training").split(),
}

POSTS_PER_COMMUNITY = 200
USERS_PER_COMMUNITY = 30


def toy_documents(seed: int = 0) -> list[Document]:
    rng = random.Random(seed)
    docs = []
    for community in COMMUNITIES:
        pool = _POOLS[community] + _SHARED
        users = [f"{community}-u{j:02d}" for j in range(USERS_PER_COMMUNITY)]
        for i in range(POSTS_PER_COMMUNITY):
            words = [rng.choice(pool) for _ in range(rng.randrange(8, 16))]
            # sprinkle topic phrases so topic coverage is non-trivial
            if rng.random() < 0.25:
                words.insert(rng.randrange(len(words)), rng.choice(TOPICS))
            docs.append(Document(
                id=f"{community}-{i:04d}",
                community=community,
                text=" ".join(words),
                author=rng.choice(users),
                is_repost=rng.random() < 0.05,
                is_reply=rng.random() < 0.05,
            ))
    return docs


def toy_interactions(seed: int = 0) -> list[dict]:
    """Retweet edges: ~8 in-community edges per user, ~0.3 cross edges."""
    rng = random.Random(seed + 1)
    users = {c: [f"{c}-u{j:02d}" for j in range(USERS_PER_COMMUNITY)]
             for c in COMMUNITIES}
    edges = []
    for community, members in users.items():
        for u in members:
            for _ in range(8):
                v = rng.choice(members)
                if v != u:
                    edges.append({"source": u, "target": v})
            if rng.random() < 0.3:
                other = rng.choice([c for c in COMMUNITIES if c != community])
                edges.append({"source": u, "target": rng.choice(users[other])})
    return edges


def write_toy_dataset(out_dir: str | Path, seed: int = 0) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    posts_path = out_dir / "posts.jsonl"
    write_documents(posts_path, toy_documents(seed))
    interactions_path = out_dir / "interactions.jsonl"
    import json
    with open(interactions_path, "w", encoding="utf-8") as fh:
        for edge in toy_interactions(seed):
            fh.write(json.dumps(edge) + "\n")
    return {"posts": posts_path, "interactions": interactions_path}


def toy_config(workdir: str | Path, seed: int = 0) -> RunConfig:
    """Scaled-down settings so a full offline run finishes in seconds."""
    cfg = RunConfig(workdir=str(workdir), seed=seed, offline=True)
    cfg.curation = CurationSettings(cap=150)
    cfg.generation = GenerationSettings(per_topic=6, exemplars=40,
                                        exemplar_tokens=12)
    cfg.filter = FilterSettings(cap=120)
    cfg.evaluation = EvaluationSettings(origin_train_per_community=100,
                                        origin_test_fraction=0.2,
                                        triplets_per_community=10,
                                        harm_per_source=10)
    cfg.screening = ScreeningSettings(samples=15, retry_rounds=2)
    return cfg
