"""Inverted index and Okapi BM25 retrieval (stage 1 of the cascade).

IDF uses the Lucene-style smoothed form
``ln(1 + (doc_count - df + 0.5) / (df + 0.5))``, which is non-negative.
Ties in every ranked list break by ascending doc_id for determinism.
"""

from __future__ import annotations

import math
import pickle
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import CorpusStats, CorpusStore, Document
from .errors import CorruptStore, EmptyCorpus, EmptyQuery, UnknownDocument
from .textnorm import normalize_tokens

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

INDEX_MAGIC = b"RPIX0001"


@dataclass(frozen=True)
class RankEntry:
    doc_id: str
    score: float
    rank: int


@dataclass
class RankedList:
    """Ordered retrieval result for one query from one stage."""

    query_id: str
    stage: str  # bm25 | refine | rerank | fused
    entries: list[RankEntry] = field(default_factory=list)

    @classmethod
    def from_scores(cls, query_id: str, stage: str,
                    scores: Mapping[str, float]) -> "RankedList":
        """Rank documents by descending score, ties by ascending doc_id."""
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        entries = [RankEntry(doc_id, score, rank)
                   for rank, (doc_id, score) in enumerate(ordered, start=1)]
        return cls(query_id=query_id, stage=stage, entries=entries)

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def doc_set(self) -> set[str]:
        return {e.doc_id for e in self.entries}

    def scores_by_doc(self) -> dict[str, float]:
        return {e.doc_id: e.score for e in self.entries}

    def ranks_by_doc(self) -> dict[str, int]:
        return {e.doc_id: e.rank for e in self.entries}

    def top(self, k: int) -> "RankedList":
        return RankedList(self.query_id, self.stage, self.entries[:k])

    def restrict(self, doc_ids: set[str]) -> "RankedList":
        """Keep only the given documents, recomputing contiguous ranks."""
        kept = [e for e in self.entries if e.doc_id in doc_ids]
        entries = [RankEntry(e.doc_id, e.score, rank)
                   for rank, e in enumerate(kept, start=1)]
        return RankedList(self.query_id, self.stage, entries)

    def validate(self) -> None:
        seen = set()
        prev_score = math.inf
        for i, entry in enumerate(self.entries, start=1):
            assert entry.rank == i, f"rank gap at position {i}"
            assert entry.score <= prev_score, f"score increases at rank {i}"
            assert entry.doc_id not in seen, f"duplicate doc {entry.doc_id}"
            seen.add(entry.doc_id)
            prev_score = entry.score


class InvertedIndex:
    """Immutable term -> postings index with BM25 scoring.

    Safe for concurrent readers once built.
    """

    def __init__(self, postings: dict[str, list[tuple[str, int]]],
                 doc_lengths: dict[str, int], stats: CorpusStats,
                 lang: str, k1: float = DEFAULT_K1, b: float = DEFAULT_B):
        self.postings = postings
        self.doc_lengths = doc_lengths
        self.stats = stats
        self.lang = lang
        self.k1 = k1
        self.b = b
        # term frequency lookup per document, built once for O(1) scoring
        self._tf: dict[str, dict[str, int]] = {term: dict(plist)
                                               for term, plist in postings.items()}

    @property
    def doc_count(self) -> int:
        return self.stats.doc_count

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.document_frequency(term)
        n = self.stats.doc_count
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def bm25_score(self, query_tokens: Iterable[str], doc_id: str) -> float:
        """Okapi BM25 score of one document for pre-normalized query tokens."""
        if doc_id not in self.doc_lengths:
            raise UnknownDocument(doc_id)
        dl = self.doc_lengths[doc_id]
        norm = self.k1 * (1.0 - self.b + self.b * dl / self.stats.avgdl)
        score = 0.0
        for token in query_tokens:
            tf = self._tf.get(token, {}).get(doc_id, 0)
            if tf == 0:
                continue
            score += self.idf(token) * tf * (self.k1 + 1.0) / (tf + norm)
        return score

    def retrieve_topk(self, query: str, query_id: str = "Q0",
                      k: int = 1000) -> RankedList:
        """Top-k documents among those sharing at least one query token."""
        if k < 1:
            raise ValueError("k must be >= 1")
        tokens = normalize_tokens(query, self.lang)
        if not tokens:
            raise EmptyQuery(f"query {query!r} has no tokens after normalization")
        candidates: set[str] = set()
        for token in set(tokens):
            candidates.update(self._tf.get(token, ()))
        scores = {doc_id: self.bm25_score(tokens, doc_id) for doc_id in candidates}
        ranked = RankedList.from_scores(query_id, "bm25", scores)
        return ranked.top(k)

    def save(self, path: str | Path) -> None:
        payload = {
            "postings": self.postings,
            "doc_lengths": self.doc_lengths,
            "stats": (self.stats.doc_count, self.stats.avgdl,
                      self.stats.avg_sentences),
            "lang": self.lang,
            "k1": self.k1,
            "b": self.b,
        }
        with open(path, "wb") as fh:
            fh.write(INDEX_MAGIC)
            pickle.dump(payload, fh, protocol=4)

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        with open(path, "rb") as fh:
            magic = fh.read(len(INDEX_MAGIC))
            if magic != INDEX_MAGIC:
                raise CorruptStore(f"{path}: bad index header {magic!r}")
            try:
                payload = pickle.load(fh)
            except Exception as exc:
                raise CorruptStore(f"{path}: unreadable index ({exc})") from exc
        doc_count, avgdl, avg_sentences = payload["stats"]
        return cls(
            postings=payload["postings"],
            doc_lengths=payload["doc_lengths"],
            stats=CorpusStats(doc_count, avgdl, avg_sentences),
            lang=payload["lang"],
            k1=payload["k1"],
            b=payload["b"],
        )


def build_index(documents: Iterable[Document], lang: str,
                k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> InvertedIndex:
    """Build an immutable inverted index over tokenized documents."""
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    total_tokens = 0
    total_sentences = 0
    for doc in documents:
        counts: dict[str, int] = {}
        for token in doc.tokens:
            counts[token] = counts.get(token, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((doc.doc_id, tf))
        doc_lengths[doc.doc_id] = len(doc.tokens)
        total_tokens += len(doc.tokens)
        total_sentences += len(doc.sentences)
    if not doc_lengths:
        raise EmptyCorpus("cannot index an empty corpus")
    n = len(doc_lengths)
    stats = CorpusStats(doc_count=n, avgdl=total_tokens / n,
                        avg_sentences=total_sentences / n)
    return InvertedIndex(postings, doc_lengths, stats, lang, k1=k1, b=b)


def build_index_from_store(store: CorpusStore,
                           k1: float = DEFAULT_K1,
                           b: float = DEFAULT_B) -> InvertedIndex:
    return build_index(store.read(), store.lang, k1=k1, b=b)
