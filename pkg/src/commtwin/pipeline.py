"""End-to-end pipeline: raw posts in, community twin reports out.

Eight stages, each reading its predecessors' files from the workdir and
recording what it wrote in the run manifest:

    ingest -> communities -> curate -> demos -> generate
           -> evaluate -> screen -> report

Stages are restartable: generation checkpoints per topic and every provider
sits behind a disk cache, so rerunning a finished workdir issues no model
calls at all.
"""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation, graph, screen, synthgen
from .config import RunConfig
from .corpus import clean_text, curate, dedup_exact, filter_originals
from .demos import (augment_with_general, build_demonstrations,
                    export_demonstrations)
from .manifest import RunManifest
from .providers import (CachingProvider, HttpProvider, MockProvider,
                        ProviderConfig)

STAGES = ("ingest", "communities", "curate", "demos", "generate",
          "evaluate", "screen", "report")

# everything a finished run must leave behind, relative to the workdir
REPORT_FILES = (
    "manifest.json",
    "communities/summary.json",
    "curated/summary.json",
    "synthetic/filter_stats.json",
    "eval/alignment.json",
    "eval/origin.json",
    "eval/topic_coverage.json",
    "eval/profiles.json",
    "eval/triplets.jsonl",
    "eval/triplets_key.json",
    "eval/harm_batch.jsonl",
    "eval/harm_key.json",
    "screen/screening.json",
    "report/report.json",
    "report/report.md",
)


class PipelineError(RuntimeError):
    """A stage could not run; the message says which input is missing or bad."""


def derive_seed(base: int, *parts: object) -> int:
    raw = "\x1f".join([str(base)] + [str(p) for p in parts])
    return int.from_bytes(
        hashlib.blake2b(raw.encode("utf-8"), digest_size=8).digest(), "big")


class Paths:
    def __init__(self, workdir: str | Path):
        self.root = Path(workdir)

    @property
    def cache(self) -> Path: return self.root / "cache"
    @property
    def ingest_posts(self) -> Path: return self.root / "ingest" / "posts.jsonl"
    @property
    def ingest_interactions(self) -> Path:
        return self.root / "ingest" / "interactions.jsonl"
    @property
    def community_posts(self) -> Path:
        return self.root / "communities" / "posts.jsonl"
    @property
    def partition(self) -> Path:
        return self.root / "communities" / "partition.jsonl"
    @property
    def community_summary(self) -> Path:
        return self.root / "communities" / "summary.json"
    @property
    def curated_dir(self) -> Path: return self.root / "curated"
    @property
    def demos_dir(self) -> Path: return self.root / "demos"
    @property
    def synth_dir(self) -> Path: return self.root / "synthetic"
    @property
    def eval_dir(self) -> Path: return self.root / "eval"
    @property
    def screen_dir(self) -> Path: return self.root / "screen"
    @property
    def report_dir(self) -> Path: return self.root / "report"

    def curated(self, community: str) -> Path:
        return self.curated_dir / f"{community}.jsonl"

    def synth(self, community: str, route: str, filtered: bool) -> Path:
        kind = "filtered" if filtered else "raw"
        return self.synth_dir / f"{community}.{route}.{kind}.jsonl"


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise PipelineError(f"missing {path}; run the {stage!r} stage first")
    return path


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _read_json(path: Path, stage: str):
    with open(_require(path, stage), encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

class ProviderSet:
    """Builds one cached client per role and tracks their backend calls."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.paths = Paths(cfg.workdir)
        self._built: dict[str, CachingProvider] = {}

    def _build(self, role: str, community: str | None = None) -> CachingProvider:
        key = role if community is None else f"{role}:{community}"
        if key in self._built:
            return self._built[key]
        settings = self.cfg.provider_for(role)
        if self.cfg.offline or settings.kind == "mock":
            inner = MockProvider(seed=derive_seed(self.cfg.seed, key),
                                 model=key)
        else:
            model = settings.model
            if community is not None and "{community}" in model:
                model = model.format(community=community)
            inner = HttpProvider(ProviderConfig(
                endpoint=settings.endpoint, model=model,
                timeout=settings.timeout,
                max_in_flight=settings.max_in_flight,
                max_attempts=settings.max_attempts,
                batch_size=settings.batch_size))
        provider = CachingProvider(inner, self.paths.cache)
        self._built[key] = provider
        return provider

    def base(self) -> CachingProvider:
        return self._build("base")

    def tuned(self, community: str) -> CachingProvider:
        return self._build("tuned", community)

    def total_calls(self) -> int:
        return sum(p.calls for p in self._built.values())


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def stage_ingest(cfg: RunConfig, posts_path: str | Path,
                 interactions_path: str | Path | None = None) -> None:
    """Normalize raw posts (and optional interaction edges) into the workdir."""
    paths = Paths(cfg.workdir)
    try:
        docs = corpus_mod.read_documents(posts_path)
    except (OSError, ValueError) as exc:
        raise PipelineError(f"cannot ingest posts: {exc}") from exc
    kept = []
    for doc in docs:
        doc.text = clean_text(doc.text, lowercase=cfg.curation.lowercase)
        if doc.text:
            kept.append(doc)
    if not kept:
        raise PipelineError("no posts survived cleaning")
    corpus_mod.write_documents(paths.ingest_posts, kept)
    outputs = [paths.ingest_posts]
    if interactions_path is not None:
        try:
            edges = graph.read_interactions(interactions_path)
        except (OSError, ValueError) as exc:
            raise PipelineError(f"cannot ingest interactions: {exc}") from exc
        paths.ingest_interactions.parent.mkdir(parents=True, exist_ok=True)
        with open(paths.ingest_interactions, "w", encoding="utf-8") as fh:
            for source, target in edges:
                fh.write(json.dumps({"source": source, "target": target}) + "\n")
        outputs.append(paths.ingest_interactions)
    _manifest(cfg).record_stage("ingest", outputs,
                                {"posts": len(kept),
                                 "dropped_empty": len(docs) - len(kept)})


def stage_communities(cfg: RunConfig) -> None:
    """Group posts into communities.

    With an interaction graph: run community detection, keep the largest
    clusters, and relabel each post by its author's cluster. Without one:
    trust the community tags already on the posts.
    """
    paths = Paths(cfg.workdir)
    docs = corpus_mod.read_documents(_require(paths.ingest_posts, "ingest"))
    summary: dict = {}
    outputs = [paths.community_posts, paths.community_summary]
    if paths.ingest_interactions.exists():
        g = graph.build_graph(
            graph.read_interactions(paths.ingest_interactions))
        partition = graph.louvain(g, seed=cfg.seed,
                                  resolution=cfg.community.resolution)
        top = graph.top_clusters(partition, k=cfg.community.top_clusters)
        names = {cluster: f"c{rank:02d}" for rank, (cluster, _) in enumerate(top)}
        relabeled, dropped = [], 0
        for doc in docs:
            cluster = (partition.assignment.get(doc.author)
                       if doc.author else None)
            if cluster in names:
                doc.community = names[cluster]
                relabeled.append(doc)
            else:
                dropped += 1
        docs = relabeled
        graph.write_partition(paths.partition, partition)
        outputs.append(paths.partition)
        summary["clusters"] = {names[c]: size for c, size in top}
        summary["modularity"] = graph.modularity(
            g, partition, cfg.community.resolution)
        summary["dropped_posts"] = dropped
    groups = corpus_mod.group_by_community(docs)
    groups = {c: corp for c, corp in groups.items()
              if len(corp) >= cfg.community.min_documents}
    if not groups:
        raise PipelineError("no community reached min_documents")
    corpus_mod.write_documents(
        paths.community_posts,
        [d for corp in groups.values() for d in corp.documents])
    summary["communities"] = {c: len(corp) for c, corp in groups.items()}
    _write_json(paths.community_summary, summary)
    _manifest(cfg).record_stage("communities", outputs)


def _curated_corpora(cfg: RunConfig) -> dict[str, corpus_mod.Corpus]:
    paths = Paths(cfg.workdir)
    _require(paths.curated_dir, "curate")
    corpora = {}
    for path in sorted(paths.curated_dir.glob("*.jsonl")):
        corp = corpus_mod.read_corpus(path)
        corpora[corp.community] = corp
    if not corpora:
        raise PipelineError(f"no curated corpora in {paths.curated_dir}")
    return corpora


def stage_curate(cfg: RunConfig, providers: ProviderSet) -> None:
    """Originals only, exact-deduped, then lowest-perplexity cap per community."""
    paths = Paths(cfg.workdir)
    docs = corpus_mod.read_documents(_require(paths.community_posts,
                                              "communities"))
    scorer = providers.base().perplexity
    summary = {}
    outputs = []
    for community, corp in corpus_mod.group_by_community(docs).items():
        originals = corp.with_documents(filter_originals(corp.documents))
        deduped = dedup_exact(originals)
        curated = curate(deduped, scorer, cap=cfg.curation.cap)
        if not curated.documents:
            raise PipelineError(f"curation left {community} empty")
        out = paths.curated(community)
        corpus_mod.write_corpus(out, curated)
        outputs.append(out)
        summary[community] = {"posts": len(corp), "originals": len(originals),
                              "deduped": len(deduped), "curated": len(curated)}
    summary_path = paths.curated_dir / "summary.json"
    _write_json(summary_path, summary)
    _manifest(cfg).record_stage("curate", outputs + [summary_path], summary)


def stage_demos(cfg: RunConfig) -> None:
    """Instruction-tuning files: tweet demos per community, plus one
    origin-classification training file across communities."""
    paths = Paths(cfg.workdir)
    corpora = _curated_corpora(cfg)
    outputs = []
    for community, corp in corpora.items():
        demos = build_demonstrations(corp, seed=derive_seed(cfg.seed, "demos",
                                                            community))
        if cfg.demos.general_fraction > 0:
            try:
                demos = augment_with_general(
                    demos, cfg.demos.general_path, cfg.demos.general_fraction,
                    seed=derive_seed(cfg.seed, "general", community))
            except (OSError, ValueError) as exc:
                raise PipelineError(f"general demos: {exc}") from exc
        out = paths.demos_dir / f"{community}.jsonl"
        export_demonstrations(demos, out)
        outputs.append(out)
    rng = random.Random(derive_seed(cfg.seed, "origin-train"))
    texts, labels = [], []
    for community, corp in corpora.items():
        pool = corp.texts()
        take = min(cfg.evaluation.origin_train_per_community, len(pool))
        for text in rng.sample(pool, take):
            texts.append(text)
            labels.append(community)
    origin_path = paths.demos_dir / "origin_train.jsonl"
    evaluation.export_classification_demos(texts, labels, origin_path)
    outputs.append(origin_path)
    _manifest(cfg).record_stage("demos", outputs)


def stage_generate(cfg: RunConfig, providers: ProviderSet) -> None:
    """Two synthetic corpora per community, both pushed through the filter."""
    paths = Paths(cfg.workdir)
    corpora = _curated_corpora(cfg)
    gen = cfg.generation
    stats: dict[str, dict] = {}
    outputs = []
    for community, curated in corpora.items():
        reference = curated.texts()
        routes = {}
        routes["finetuned"] = synthgen.generate_finetuned_corpus(
            providers.tuned(community), community,
            per_topic=gen.per_topic, seed=derive_seed(cfg.seed, "ft", community),
            temperature=gen.temperature, max_tokens=gen.max_tokens,
            checkpoint_dir=paths.synth_dir / "checkpoints" / community / "ft")
        routes["context"] = synthgen.generate_context_corpus(
            providers.base(), curated,
            per_topic=gen.per_topic, seed=derive_seed(cfg.seed, "ctx", community),
            exemplars=gen.exemplars, exemplar_tokens=gen.exemplar_tokens,
            temperature=gen.temperature, max_tokens=gen.max_tokens,
            checkpoint_dir=paths.synth_dir / "checkpoints" / community / "ctx")
        stats[community] = {}
        for route, raw in routes.items():
            raw_path = paths.synth(community, route, filtered=False)
            corpus_mod.write_corpus(raw_path, raw)
            filtered, route_stats = synthgen.filter_synthetic(
                raw, providers.base().perplexity, reference,
                max_perplexity=cfg.filter.max_perplexity,
                max_rouge=cfg.filter.max_rouge, cap=cfg.filter.cap,
                seed=derive_seed(cfg.seed, "filter", community, route))
            if not filtered.documents:
                raise PipelineError(
                    f"filter removed every {route} tweet for {community}")
            filtered_path = paths.synth(community, route, filtered=True)
            corpus_mod.write_corpus(filtered_path, filtered)
            outputs.extend([raw_path, filtered_path])
            stats[community][route] = route_stats.as_dict()
    stats_path = paths.synth_dir / "filter_stats.json"
    _write_json(stats_path, stats)
    _manifest(cfg).record_stage("generate", outputs + [stats_path])


def _synthetic_corpora(cfg: RunConfig, community: str,
                       ) -> dict[str, corpus_mod.Corpus]:
    paths = Paths(cfg.workdir)
    out = {}
    for route in ("finetuned", "context"):
        path = _require(paths.synth(community, route, filtered=True), "generate")
        out[route] = corpus_mod.read_corpus(path)
    return out


def stage_evaluate(cfg: RunConfig, providers: ProviderSet) -> None:
    """Alignment metrics, origin classification, topic coverage, community
    profiles, and the blinded human-review batches."""
    paths = Paths(cfg.workdir)
    corpora = _curated_corpora(cfg)
    scorer = providers.base()
    ev = cfg.evaluation

    alignment_rows = []
    coverage: dict[str, dict] = {}
    profiles: dict[str, str] = {}
    triplet_rows: list[dict] = []
    triplet_key: dict = {}
    harm_sources: dict[str, list[str]] = {}
    synth_texts: dict[str, list[tuple[str, str]]] = {"finetuned": [],
                                                     "context": []}
    for community, curated in corpora.items():
        synthetic = _synthetic_corpora(cfg, community)
        report = evaluation.evaluate_community(
            scorer, curated, synthetic,
            toxicity_threshold=ev.toxicity_threshold)
        alignment_rows.append(report.as_dict())
        coverage[community] = {
            "original": synthgen.count_topic_mentions(curated.texts()),
            **{route: synthgen.count_topic_mentions(corp.texts())
               for route, corp in synthetic.items()}}
        profiles[community] = synthgen.profile_community(
            scorer, curated.texts(),
            seed=derive_seed(cfg.seed, "profile", community))
        rows, key = evaluation.sample_triplets(
            curated, synthetic["finetuned"], synthetic["context"],
            per_community=ev.triplets_per_community,
            seed=derive_seed(cfg.seed, "triplets", community))
        triplet_rows.extend(rows)
        triplet_key.update(key)
        harm_sources[f"{community}/original"] = curated.texts()
        for route, corp in synthetic.items():
            harm_sources[f"{community}/{route}"] = corp.texts()
            synth_texts[route].extend(
                (text, community) for text in corp.texts())

    # origin classification: fit on held-in originals, test iid and on
    # each synthetic route
    rng = random.Random(derive_seed(cfg.seed, "origin"))
    labeled = []
    for community, curated in corpora.items():
        pool = curated.texts()
        take = min(ev.origin_train_per_community, len(pool))
        labeled.extend((text, community) for text in rng.sample(pool, take))
    train, test = evaluation.split_train_test(
        labeled, ev.origin_test_fraction,
        seed=derive_seed(cfg.seed, "origin-split"))
    clf = evaluation.NaiveBayesOriginClassifier()
    clf.fit([t for t, _ in train], [c for _, c in train])
    origin = {
        "backend": "naive-bayes",
        "train_size": len(train),
        "test_size": len(test),
        "iid_macro_f1": evaluation.origin_macro_f1(
            clf, [t for t, _ in test], [c for _, c in test]),
    }
    for route, pairs in synth_texts.items():
        origin[f"{route}_macro_f1"] = evaluation.origin_macro_f1(
            clf, [t for t, _ in pairs], [c for _, c in pairs])
        origin[f"{route}_size"] = len(pairs)

    harm_rows, harm_key = evaluation.sample_harm_batch(
        harm_sources, per_source=ev.harm_per_source,
        seed=derive_seed(cfg.seed, "harm"))

    alignment_path = paths.eval_dir / "alignment.json"
    _write_json(alignment_path, alignment_rows)
    origin_path = paths.eval_dir / "origin.json"
    _write_json(origin_path, origin)
    coverage_path = paths.eval_dir / "topic_coverage.json"
    _write_json(coverage_path, coverage)
    profiles_path = paths.eval_dir / "profiles.json"
    _write_json(profiles_path, profiles)
    triplets_path = paths.eval_dir / "triplets.jsonl"
    triplets_path.parent.mkdir(parents=True, exist_ok=True)
    with open(triplets_path, "w", encoding="utf-8") as fh:
        for row in triplet_rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    triplet_key_path = paths.eval_dir / "triplets_key.json"
    _write_json(triplet_key_path, triplet_key)
    harm_path = paths.eval_dir / "harm_batch.jsonl"
    with open(harm_path, "w", encoding="utf-8") as fh:
        for row in harm_rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    harm_key_path = paths.eval_dir / "harm_key.json"
    _write_json(harm_key_path, harm_key)
    _manifest(cfg).record_stage("evaluate", [
        alignment_path, origin_path, coverage_path, profiles_path,
        triplets_path, triplet_key_path, harm_path, harm_key_path])


def stage_screen(cfg: RunConfig, providers: ProviderSet) -> None:
    """Run the eating-disorder screener against each community's tuned model."""
    paths = Paths(cfg.workdir)
    corpora = _curated_corpora(cfg)
    results = []
    for community in corpora:
        results.append(screen.screen_community(
            providers.tuned(community), community,
            samples=cfg.screening.samples,
            temperature=cfg.screening.temperature,
            retry_rounds=cfg.screening.retry_rounds))
    rows = screen.screening_report(results)
    out = paths.screen_dir / "screening.json"
    _write_json(out, rows)
    _manifest(cfg).record_stage("screen", [out])


def stage_report(cfg: RunConfig) -> None:
    """Collate every stage's outputs into one JSON blob and one readable page."""
    paths = Paths(cfg.workdir)
    report = {
        "communities": _read_json(paths.community_summary, "communities"),
        "curation": _read_json(paths.curated_dir / "summary.json", "curate"),
        "filter": _read_json(paths.synth_dir / "filter_stats.json", "generate"),
        "alignment": _read_json(paths.eval_dir / "alignment.json", "evaluate"),
        "origin": _read_json(paths.eval_dir / "origin.json", "evaluate"),
        "topic_coverage": _read_json(paths.eval_dir / "topic_coverage.json",
                                     "evaluate"),
        "profiles": _read_json(paths.eval_dir / "profiles.json", "evaluate"),
        "screening": _read_json(paths.screen_dir / "screening.json", "screen"),
    }
    json_path = paths.report_dir / "report.json"
    _write_json(json_path, report)
    md_path = paths.report_dir / "report.md"
    md_path.parent.mkdir(parents=True, exist_ok=True)
    with open(md_path, "w", encoding="utf-8") as fh:
        fh.write(_render_markdown(report))
    _manifest(cfg).record_stage("report", [json_path, md_path])


def _render_markdown(report: dict) -> str:
    lines = ["# Community twin report", ""]
    lines.append("## Communities")
    lines.append("")
    lines.append("| community | curated posts | profile |")
    lines.append("|---|---|---|")
    curation = report["curation"]
    for community in sorted(curation):
        profile = report["profiles"].get(community, "")
        lines.append(f"| {community} | {curation[community]['curated']} "
                     f"| {profile} |")
    lines.append("")
    lines.append("## Alignment")
    lines.append("")
    lines.append("| community | route | frechet | emotion | toxicity |")
    lines.append("|---|---|---|---|---|")
    for row in report["alignment"]:
        for route, m in sorted(row["routes"].items()):
            lines.append(
                f"| {row['community']} | {route} | {m['frechet']:.3f} "
                f"| {m['emotional_alignment']:.3f} "
                f"| {m['toxicity_rate']:.3f} |")
    lines.append("")
    origin = report["origin"]
    lines.append("## Origin classification")
    lines.append("")
    lines.append(f"- backend: {origin['backend']}")
    for key in sorted(origin):
        if key.endswith("_macro_f1"):
            lines.append(f"- {key}: {origin[key]:.3f}")
    lines.append("")
    lines.append("## Screening")
    lines.append("")
    lines.append("| community | WCS | C2 | C3 | C4 |")
    lines.append("|---|---|---|---|---|")
    for row in report["screening"]:
        flags = ["T" if row[c] else "F" for c in ("c2", "c3", "c4")]
        lines.append(f"| {row['community']} | {row['wcs']:.1f} "
                     f"| {flags[0]} | {flags[1]} | {flags[2]} |")
    lines.append("")
    return "\n".join(lines)


def _manifest(cfg: RunConfig) -> RunManifest:
    return RunManifest.load_or_create(cfg.workdir, cfg.seed, cfg.digest())


def run_all(cfg: RunConfig, posts_path: str | Path,
            interactions_path: str | Path | None = None) -> dict:
    """Run every stage in order; returns stage list and total backend calls."""
    providers = ProviderSet(cfg)
    stage_ingest(cfg, posts_path, interactions_path)
    stage_communities(cfg)
    stage_curate(cfg, providers)
    stage_demos(cfg)
    stage_generate(cfg, providers)
    stage_evaluate(cfg, providers)
    stage_screen(cfg, providers)
    stage_report(cfg)
    return {"stages": list(STAGES), "provider_calls": providers.total_calls()}
