"""End-to-end run orchestration from a declarative run configuration.

A run config names the corpus, index, topics, providers, query type,
fusion method, and stage cutoffs. For every topic the pipeline derives
the query (translating first for bilingual runs), retrieves with BM25,
refines with the bi-encoder, re-ranks with the cross-encoder, fuses, and
truncates to the final cutoff. Topic failures are isolated so one bad
topic cannot lose the rest of the run.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .cache import EmbeddingCache
from .corpus import CorpusStore
from .encoders import make_embedding_provider, make_pair_scorer
from .errors import InvariantViolation, RankpipeError
from .evalkit import write_run
from .lexical import InvertedIndex, RankedList
from .queries import derive_query, load_topics, translated_topic
from .ranking import AggregationWeights, FusionConfig, fuse, refine, rerank

logger = logging.getLogger(__name__)

BI_URL_ENV = "RANKPIPE_BI_URL"
CROSS_URL_ENV = "RANKPIPE_CROSS_URL"


@dataclass
class RunConfig:
    run_tag: str
    query_lang: str
    doc_lang: str
    query_type: str  # key_conv | udels | t5
    bi_provider: str
    cross_provider: str
    fusion: FusionConfig = field(default_factory=FusionConfig)
    stage1: int = 1000
    stage2: int = 400
    final: int = 200
    weights: tuple[float, ...] = (0.5, 0.3, 0.2)
    corpus_store: str = ""
    index_path: str = ""
    topics_path: str = ""
    expansions_path: str | None = None
    translations_path: str | None = None
    cache_path: str | None = None
    output_path: str = "run.txt"
    parallelism: int = 1

    @property
    def bilingual(self) -> bool:
        return self.query_lang != self.doc_lang


def load_config(path: str | Path) -> RunConfig:
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    fusion_raw = raw.get("fusion", {})
    cutoffs = raw.get("cutoffs", {})
    paths = raw.get("paths", {})
    return RunConfig(
        run_tag=raw["run_tag"],
        query_lang=raw["query_lang"],
        doc_lang=raw["doc_lang"],
        query_type=raw["query_type"],
        bi_provider=raw["bi_provider"],
        cross_provider=raw["cross_provider"],
        fusion=FusionConfig(
            alpha=float(fusion_raw.get("alpha", 0.5)),
            beta=float(fusion_raw.get("beta", 0.4)),
            rrf_k=float(fusion_raw.get("rrf_k", 60.0)),
            method=fusion_raw.get("method", "wcombsum"),
        ),
        stage1=int(cutoffs.get("stage1", 1000)),
        stage2=int(cutoffs.get("stage2", 400)),
        final=int(cutoffs.get("final", 200)),
        weights=tuple(raw.get("weights", (0.5, 0.3, 0.2))),
        corpus_store=paths.get("corpus_store", ""),
        index_path=paths.get("index", ""),
        topics_path=paths.get("topics", ""),
        expansions_path=paths.get("expansions"),
        translations_path=paths.get("translations"),
        cache_path=paths.get("cache"),
        output_path=raw.get("output", "run.txt"),
        parallelism=int(raw.get("parallelism", 1)),
    )


def validate_config(cfg: RunConfig) -> list[str]:
    """All invariant violations as human-readable diagnostics."""
    problems: list[str] = []
    if not cfg.run_tag:
        problems.append("run_tag must be non-empty")
    if cfg.query_type not in ("key_conv", "udels", "t5"):
        problems.append(f"unknown query type {cfg.query_type!r}")
    if not (cfg.stage1 >= cfg.stage2 >= cfg.final >= 1):
        problems.append("cutoffs must satisfy stage1 >= stage2 >= final >= 1")
    problems.extend(cfg.fusion.diagnostics())
    try:
        AggregationWeights(cfg.weights)
    except InvariantViolation as exc:
        problems.append(f"weights: {exc}")
    if cfg.bilingual and not cfg.translations_path:
        problems.append("bilingual run (query_lang != doc_lang) requires a "
                        "translations path")
    if cfg.query_type == "t5" and not cfg.expansions_path:
        problems.append("t5 query type requires an expansions path")
    if cfg.parallelism < 1:
        problems.append("parallelism must be >= 1")
    return problems


@dataclass
class StageOutputs:
    bm25: RankedList
    refined: RankedList
    reranked: RankedList
    fused: RankedList


def execute_topic(topic, cfg: RunConfig, index: InvertedIndex, docs,
                  stats, bi_provider, cross_provider, cache,
                  weights: AggregationWeights) -> StageOutputs:
    if cfg.bilingual:
        topic = translated_topic(topic, cfg.doc_lang)
    query = derive_query(topic, cfg.query_type)

    t0 = time.perf_counter()
    bm25_list = index.retrieve_topk(query, topic.topic_id, cfg.stage1)
    t1 = time.perf_counter()
    refined = refine(bm25_list, query, bi_provider, docs, stats,
                     weights, cache)
    t2 = time.perf_counter()
    reranked = rerank(refined.top(cfg.stage2), query, cross_provider,
                      docs, stats, weights)
    t3 = time.perf_counter()
    fused = fuse(bm25_list, refined, reranked, cfg.fusion).top(cfg.final)
    t4 = time.perf_counter()
    logger.info(
        "topic %s: bm25 %d docs %.3fs | refine %.3fs | rerank %d docs %.3fs "
        "| fuse %.3fs", topic.topic_id, len(bm25_list.entries), t1 - t0,
        t2 - t1, len(reranked.entries), t3 - t2, t4 - t3)
    return StageOutputs(bm25_list, refined, reranked, fused)


def execute_all(cfg: RunConfig,
                weights_override: AggregationWeights | None = None,
                ) -> tuple[dict[str, StageOutputs], list[str]]:
    """Run the cascade for every topic, isolating per-topic failures."""
    problems = validate_config(cfg)
    if problems:
        raise InvariantViolation("; ".join(problems))

    store = CorpusStore(cfg.corpus_store, cfg.doc_lang)
    docs = store.read_all()
    stats = store.stats()
    index = InvertedIndex.load(cfg.index_path)
    topics = [t for t in load_topics(cfg.topics_path, cfg.expansions_path,
                                     cfg.translations_path)
              if t.lang == cfg.query_lang]
    bi_provider = make_embedding_provider(
        os.environ.get(BI_URL_ENV, cfg.bi_provider), lang=cfg.doc_lang)
    cross_provider = make_pair_scorer(
        os.environ.get(CROSS_URL_ENV, cfg.cross_provider))
    cache = EmbeddingCache(cfg.cache_path) if cfg.cache_path else None
    weights = weights_override or AggregationWeights(cfg.weights)

    def one_topic(topic):
        return execute_topic(topic, cfg, index, docs, stats, bi_provider,
                             cross_provider, cache, weights)

    results: dict[str, StageOutputs] = {}
    failures: list[str] = []
    if cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            futures = {topic.topic_id: pool.submit(one_topic, topic)
                       for topic in topics}
        for topic_id, future in futures.items():
            try:
                results[topic_id] = future.result()
            except RankpipeError as exc:
                logger.error("topic %s failed: %s", topic_id, exc)
                failures.append(topic_id)
    else:
        for topic in topics:
            try:
                results[topic.topic_id] = one_topic(topic)
            except RankpipeError as exc:
                logger.error("topic %s failed: %s", topic.topic_id, exc)
                failures.append(topic.topic_id)
    return results, failures


def run_pipeline(cfg: RunConfig, keep_stages: bool = False) -> tuple[Path, list[str]]:
    """Execute the full cascade and write the final run file.

    Returns the run file path and the list of failed topic ids. The run
    file records completed topics only.
    """
    results, failures = execute_all(cfg)
    out_path = Path(cfg.output_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_run({qid: out.fused for qid, out in results.items()},
              out_path, cfg.run_tag)
    if keep_stages:
        for suffix, attr in (
            (".bm25", "bm25"), (".refine", "refined"),
            (".rerank", "reranked"), (".fused", "fused"),
        ):
            stage_runs = {qid: getattr(out, attr)
                          for qid, out in results.items()}
            write_run(stage_runs, str(out_path) + suffix, cfg.run_tag)
    return out_path, failures
