"""Stages 2-3 of the cascade and rank fusion.

Document-level relevance is the weighted sum of the top-k sentence
scores (first N sentences only, N = rounded corpus average). Fusion
offers weighted CombSUM over min-max normalized stage scores, and
rank-only RRF and Borda over the two neural stages.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .cache import EmbeddingCache, cache_get_or_compute
from .corpus import CorpusStats, Document
from .encoders import EmbeddingProvider, PairScorer, cosine
from .errors import (
    DocSetMismatch,
    EmptyGrid,
    EmptyScores,
    InvariantViolation,
    MissingStageScore,
    NonFiniteScore,
    NoQrels,
)
from .lexical import RankedList

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoredSentence:
    sentence_index: int
    score: float


@dataclass(frozen=True)
class AggregationWeights:
    """Top-k sentence aggregation weights, strictly decreasing and positive."""

    w: tuple[float, ...] = (0.5, 0.3, 0.2)

    def __post_init__(self):
        if not self.w:
            raise InvariantViolation("weights must be non-empty")
        if any(x <= 0 for x in self.w):
            raise InvariantViolation("weights must all be positive")
        if any(a <= b for a, b in zip(self.w, self.w[1:])):
            raise InvariantViolation("weights must be strictly decreasing")

    @property
    def k(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5
    beta: float = 0.4
    rrf_k: float = 60.0
    method: str = "wcombsum"  # wcombsum | rrf | borda | none

    def diagnostics(self) -> list[str]:
        problems = []
        if self.method not in ("wcombsum", "rrf", "borda", "none"):
            problems.append(f"unknown fusion method {self.method!r}")
        if self.alpha <= self.beta:
            problems.append("alpha must exceed beta")
        if self.alpha + self.beta >= 1.0:
            problems.append("alpha + beta must be below 1 so the lexical "
                            "weight stays positive")
        if self.rrf_k <= 0:
            problems.append("rrf_k must be positive")
        return problems


def sentence_budget(stats: CorpusStats) -> int:
    """First-N-sentences policy: rounded corpus average, minimum 1."""
    return max(1, round(stats.avg_sentences))


def aggregate_topk(sentence_scores: Sequence[ScoredSentence],
                   weights: AggregationWeights) -> float:
    """Weighted sum of the top-k sentence scores, truncated when a document
    has fewer sentences than weights (no padding, no renormalization)."""
    if not sentence_scores:
        raise EmptyScores("aggregation requires at least one sentence score")
    ordered = sorted((s.score for s in sentence_scores), reverse=True)
    total = 0.0
    for w, score in zip(weights.w, ordered):
        total += w * score
    return total


def refine(candidates: RankedList, topic_query: str,
           provider: EmbeddingProvider, docs: Mapping[str, Document],
           stats: CorpusStats,
           weights: AggregationWeights = AggregationWeights(),
           cache: EmbeddingCache | None = None) -> RankedList:
    """Bi-encoder stage: cosine between the query vector and each of the
    first N sentence vectors, aggregated to a document score."""
    n_sentences = sentence_budget(stats)
    query_vec = cache_get_or_compute(cache, provider, [topic_query])[0]
    scores: dict[str, float] = {}
    for entry in candidates.entries:
        doc = docs[entry.doc_id]
        sentences = list(doc.sentences[:n_sentences])
        if not sentences:
            logger.warning("document %s has no sentences; sinking", doc.doc_id)
            scores[doc.doc_id] = -math.inf
            continue
        vectors = cache_get_or_compute(cache, provider, sentences)
        sentence_scores = [ScoredSentence(i, cosine(query_vec, vec))
                           for i, vec in enumerate(vectors)]
        scores[doc.doc_id] = aggregate_topk(sentence_scores, weights)
    return RankedList.from_scores(candidates.query_id, "refine", scores)


def rerank(candidates: RankedList, topic_query: str, scorer: PairScorer,
           docs: Mapping[str, Document], stats: CorpusStats,
           weights: AggregationWeights = AggregationWeights()) -> RankedList:
    """Cross-encoder stage: pair scores for the first N sentences,
    aggregated exactly as in refine."""
    n_sentences = sentence_budget(stats)
    scores: dict[str, float] = {}
    for entry in candidates.entries:
        doc = docs[entry.doc_id]
        sentences = list(doc.sentences[:n_sentences])
        if not sentences:
            logger.warning("document %s has no sentences; sinking", doc.doc_id)
            scores[doc.doc_id] = -math.inf
            continue
        pair_scores = scorer.score_pairs(topic_query, sentences)
        sentence_scores = [ScoredSentence(i, s)
                           for i, s in enumerate(pair_scores)]
        scores[doc.doc_id] = aggregate_topk(sentence_scores, weights)
    return RankedList.from_scores(candidates.query_id, "rerank", scores)


def min_max_normalize(scores: Sequence[float]) -> list[float]:
    """(s - min) / (max - min); constant lists map to all 1.0 so a
    degenerate stage contributes its full weight uniformly."""
    if not scores:
        raise EmptyScores("cannot normalize an empty list")
    if any(not math.isfinite(s) for s in scores):
        raise NonFiniteScore("scores must all be finite")
    lo = min(scores)
    hi = max(scores)
    if hi == lo:
        return [1.0] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def _stage_scores(stage: RankedList, doc_ids: Sequence[str],
                  stage_name: str) -> list[float]:
    by_doc = stage.scores_by_doc()
    missing = [d for d in doc_ids if d not in by_doc]
    if missing:
        raise MissingStageScore(
            f"{stage_name} stage lacks scores for {missing[:3]}")
    return [by_doc[d] for d in doc_ids]


def wcombsum(bm25: RankedList, bi: RankedList, cross: RankedList,
             cfg: FusionConfig = FusionConfig()) -> RankedList:
    """Weighted CombSUM over min-max normalized stage scores, computed
    over the fused (cross-stage) document set."""
    doc_ids = cross.doc_ids()
    norm_cross = min_max_normalize(_stage_scores(cross, doc_ids, "rerank"))
    norm_bi = min_max_normalize(_stage_scores(bi, doc_ids, "refine"))
    norm_bm25 = min_max_normalize(_stage_scores(bm25, doc_ids, "bm25"))
    gamma = 1.0 - cfg.alpha - cfg.beta
    fused = {
        doc_id: cfg.alpha * c + cfg.beta * b + gamma * l
        for doc_id, c, b, l in zip(doc_ids, norm_cross, norm_bi, norm_bm25)
    }
    return RankedList.from_scores(cross.query_id, "fused", fused)


def _check_same_docs(bi: RankedList, cross: RankedList) -> None:
    if bi.doc_set() != cross.doc_set():
        raise DocSetMismatch(
            "rank fusion requires identical document sets in both lists")


def rrf(bi: RankedList, cross: RankedList, rrf_k: float = 60.0) -> RankedList:
    """Reciprocal rank fusion of the two neural stages (ranks only)."""
    _check_same_docs(bi, cross)
    bi_ranks = bi.ranks_by_doc()
    fused = {
        e.doc_id: 1.0 / (rrf_k + e.rank) + 1.0 / (rrf_k + bi_ranks[e.doc_id])
        for e in cross.entries
    }
    return RankedList.from_scores(cross.query_id, "fused", fused)


def borda(bi: RankedList, cross: RankedList) -> RankedList:
    """Borda fusion of the two neural stages (ranks only)."""
    _check_same_docs(bi, cross)
    n = len(cross.entries)
    bi_ranks = bi.ranks_by_doc()
    fused = {
        e.doc_id: (n - e.rank + 1) / n + (n - bi_ranks[e.doc_id] + 1) / n
        for e in cross.entries
    }
    return RankedList.from_scores(cross.query_id, "fused", fused)


def fuse(bm25: RankedList, bi: RankedList, cross: RankedList,
         cfg: FusionConfig) -> RankedList:
    """Apply the configured fusion method; ``none`` passes rerank through."""
    if cfg.method == "none":
        return RankedList(cross.query_id, "fused", list(cross.entries))
    if cfg.method == "wcombsum":
        return wcombsum(bm25, bi, cross, cfg)
    restricted_bi = bi.restrict(cross.doc_set())
    if cfg.method == "rrf":
        return rrf(restricted_bi, cross, cfg.rrf_k)
    if cfg.method == "borda":
        return borda(restricted_bi, cross)
    raise ValueError(f"unknown fusion method {cfg.method!r}")


def grid_search_weights(
    candidate_grid: Sequence[AggregationWeights],
    qrels,
    dev_run_fn: Callable[[AggregationWeights], Mapping[str, RankedList]],
    metric: Callable[[RankedList, object], float] | None = None,
) -> AggregationWeights:
    """Exhaustive search for the aggregation weights maximizing the mean
    metric (full-depth NDCG by default) over dev topics. Ties break by
    grid order."""
    from . import evalkit

    if not candidate_grid:
        raise EmptyGrid("candidate grid is empty")
    if qrels is None or not qrels.judgments:
        raise NoQrels("grid search requires relevance judgments")
    if metric is None:
        metric = evalkit.ndcg
    best = None
    best_score = -math.inf
    for weights in candidate_grid:
        runs = dev_run_fn(weights)
        values = [metric(run, qrels) for qid, run in sorted(runs.items())
                  if qrels.relevant_count(qid) > 0]
        mean = sum(values) / len(values) if values else 0.0
        if mean > best_score:
            best = weights
            best_score = mean
    return best
