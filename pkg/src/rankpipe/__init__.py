"""Multistage document retrieval: BM25, bi-encoder refinement,
cross-encoder re-ranking, rank fusion, and a TREC-style evaluation kit."""

from .corpus import CorpusStats, CorpusStore, Document, compute_corpus_stats, ingest_document
from .encoders import HashingEmbedder, JaccardScorer, cosine
from .lexical import InvertedIndex, RankedList, RankEntry, build_index
from .queries import QueryTopic, key_conv, t5_query, udels_query
from .ranking import AggregationWeights, FusionConfig, aggregate_topk, borda, refine, rerank, rrf, wcombsum

__version__ = "0.1.0"

__all__ = [
    "AggregationWeights",
    "CorpusStats",
    "CorpusStore",
    "Document",
    "FusionConfig",
    "HashingEmbedder",
    "InvertedIndex",
    "JaccardScorer",
    "QueryTopic",
    "RankEntry",
    "RankedList",
    "aggregate_topk",
    "borda",
    "build_index",
    "compute_corpus_stats",
    "cosine",
    "ingest_document",
    "key_conv",
    "refine",
    "rerank",
    "rrf",
    "t5_query",
    "udels_query",
    "wcombsum",
]
