"""Neural scoring provider contracts and built-in offline implementations.

Two contracts: EmbeddingProvider (bi-encoder, returns fixed-dim vectors)
and PairScorer (cross-encoder, returns [0, 1] relevance per sentence).
The offline test providers (seeded feature hashing, token-overlap
Jaccard) make the whole pipeline runnable with no models and no network.
Remote providers speak the HTTP wire protocol of the encoder sidecar.
"""

from __future__ import annotations

import hashlib
import logging
import time
from abc import ABC, abstractmethod

import numpy as np
import requests

from .errors import (
    DimensionMismatch,
    EmptyBatch,
    ProviderUnavailable,
    ZeroVector,
)
from .textnorm import tokenize

logger = logging.getLogger(__name__)


class EmbeddingProvider(ABC):
    """Deterministic text -> fixed-length vector encoder."""

    name: str
    dim: int

    @abstractmethod
    def _embed(self, texts: list[str]) -> list[np.ndarray]:
        ...

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise EmptyBatch("embed requires at least one text")
        if any(not t for t in texts):
            raise EmptyBatch("embed texts must be non-empty strings")
        vectors = self._embed(list(texts))
        if len(vectors) != len(texts):
            raise DimensionMismatch(
                f"provider {self.name} returned {len(vectors)} vectors "
                f"for {len(texts)} texts")
        for vec in vectors:
            if vec.shape != (self.dim,):
                raise DimensionMismatch(
                    f"provider {self.name} returned shape {vec.shape}, "
                    f"expected ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise DimensionMismatch(
                    f"provider {self.name} returned non-finite components")
        return vectors


class PairScorer(ABC):
    """Deterministic (query, sentence) -> [0, 1] relevance scorer."""

    name: str

    @abstractmethod
    def _score(self, query: str, sentences: list[str]) -> list[float]:
        ...

    def score_pairs(self, query: str, sentences: list[str]) -> list[float]:
        if not sentences:
            raise EmptyBatch("score_pairs requires at least one sentence")
        scores = self._score(query, list(sentences))
        clamped = []
        for s in scores:
            if s < 0.0 or s > 1.0:
                logger.warning("provider %s score %r outside [0,1]; clamped",
                               self.name, s)
                s = min(1.0, max(0.0, s))
            clamped.append(float(s))
        return clamped


class HashingEmbedder(EmbeddingProvider):
    """Seeded feature-hashing embedder over word tokens.

    Each token hashes to a (bucket, sign) via keyed blake2b, so vectors
    are deterministic across processes and platforms. Stored in float32.
    """

    def __init__(self, dim: int = 64, seed: int = 7):
        self.name = f"hashing-{dim}-{seed}"
        self.dim = dim
        self.seed = seed

    def _token_slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(
            token.encode("utf-8"),
            key=str(self.seed).encode("ascii"),
            digest_size=8,
        ).digest()
        value = int.from_bytes(digest, "big")
        bucket = value % self.dim
        sign = 1.0 if (value >> 63) & 1 else -1.0
        return bucket, sign

    def _embed(self, texts: list[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            vec = np.zeros(self.dim, dtype=np.float32)
            for token in tokenize(text):
                bucket, sign = self._token_slot(token)
                vec[bucket] += sign
            if not vec.any():
                # text with no word tokens still needs a valid direction
                vec[0] = 1.0
            out.append(vec)
        return out


class JaccardScorer(PairScorer):
    """Token-overlap Jaccard similarity between query and sentence."""

    def __init__(self):
        self.name = "jaccard"

    def _score(self, query: str, sentences: list[str]) -> list[float]:
        q = set(tokenize(query))
        scores = []
        for sentence in sentences:
            s = set(tokenize(sentence))
            union = q | s
            scores.append(len(q & s) / len(union) if union else 0.0)
        return scores


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity with float64 accumulation."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"cosine shapes {u.shape} vs {v.shape}")
    u64 = u.astype(np.float64)
    v64 = v.astype(np.float64)
    nu = np.linalg.norm(u64)
    nv = np.linalg.norm(v64)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine undefined for an all-zero vector")
    value = float(np.dot(u64, v64) / (nu * nv))
    return max(-1.0, min(1.0, value))


def _request_with_retry(method: str, url: str, attempts: int = 3,
                        backoff: float = 0.5, **kwargs):
    last_error = None
    for attempt in range(attempts):
        try:
            response = requests.request(method, url, timeout=60, **kwargs)
            if response.status_code == 200:
                return response
            last_error = f"HTTP {response.status_code}"
        except requests.RequestException as exc:
            last_error = str(exc)
        if attempt + 1 < attempts:
            time.sleep(backoff * (2 ** attempt))
    raise ProviderUnavailable(f"{method} {url}: {last_error}")


class RemoteEmbeddingProvider(EmbeddingProvider):
    """HTTP client for a sidecar /embed endpoint."""

    def __init__(self, base_url: str, lang: str = "en", batch_size: int = 32):
        self.base_url = base_url.rstrip("/")
        self.lang = lang
        self.batch_size = batch_size
        info = _request_with_retry("GET", f"{self.base_url}/info").json()
        self.name = info["name"]
        self.dim = int(info["dim"])

    def _embed(self, texts: list[str]) -> list[np.ndarray]:
        vectors: list[np.ndarray] = []
        for start in range(0, len(texts), self.batch_size):
            batch = texts[start:start + self.batch_size]
            response = _request_with_retry(
                "POST", f"{self.base_url}/embed",
                json={"texts": batch, "lang": self.lang})
            payload = response.json()
            if int(payload["dim"]) != self.dim:
                raise DimensionMismatch(
                    f"remote dim {payload['dim']} != /info dim {self.dim}")
            vectors.extend(np.asarray(row, dtype=np.float32)
                           for row in payload["vectors"])
        return vectors


class RemotePairScorer(PairScorer):
    """HTTP client for a sidecar /score_pairs endpoint."""

    def __init__(self, base_url: str, batch_size: int = 32):
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        info = _request_with_retry("GET", f"{self.base_url}/info").json()
        self.name = info["name"]

    def _score(self, query: str, sentences: list[str]) -> list[float]:
        scores: list[float] = []
        for start in range(0, len(sentences), self.batch_size):
            batch = sentences[start:start + self.batch_size]
            response = _request_with_retry(
                "POST", f"{self.base_url}/score_pairs",
                json={"query": query, "sentences": batch})
            scores.extend(float(s) for s in response.json()["scores"])
        return scores


_PROVIDER_FACTORIES = {
    "hashing": lambda: HashingEmbedder(),
    "jaccard": lambda: JaccardScorer(),
}


def make_embedding_provider(name: str, lang: str = "en") -> EmbeddingProvider:
    """Resolve a provider name: built-in offline name or an http(s) URL."""
    if name.startswith(("http://", "https://")):
        return RemoteEmbeddingProvider(name, lang=lang)
    if name in _PROVIDER_FACTORIES:
        provider = _PROVIDER_FACTORIES[name]()
        if not isinstance(provider, EmbeddingProvider):
            raise ValueError(f"{name} is not an embedding provider")
        return provider
    raise ValueError(f"unknown embedding provider {name!r}")


def make_pair_scorer(name: str) -> PairScorer:
    if name.startswith(("http://", "https://")):
        return RemotePairScorer(name)
    if name in _PROVIDER_FACTORIES:
        scorer = _PROVIDER_FACTORIES[name]()
        if not isinstance(scorer, PairScorer):
            raise ValueError(f"{name} is not a pair scorer")
        return scorer
    raise ValueError(f"unknown pair scorer {name!r}")
