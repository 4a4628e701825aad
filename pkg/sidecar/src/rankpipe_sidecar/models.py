"""Model registry and the backends it can serve.

Two deterministic offline backends (feature hashing for embeddings,
token-overlap for pair scores) keep the service runnable with no
downloads; real checkpoints are served through sentence-transformers
when a model identifier is configured. Which models to serve is always a
config-file decision, never code.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol

import numpy as np
import yaml

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _tokenize(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN_RE.findall(text)]


class EmbedModel(Protocol):
    name: str
    dim: int

    def embed(self, texts: list[str]) -> list[list[float]]: ...


class PairModel(Protocol):
    name: str

    def score(self, query: str, sentences: list[str]) -> list[float]: ...


class HashEmbedModel:
    """Keyed feature-hashing embedder: deterministic across processes,
    no model weights required."""

    def __init__(self, dim: int = 64, seed: int = 7):
        self.name = f"hash-{dim}-{seed}"
        self.dim = dim
        self._key = str(seed).encode("ascii")

    def embed(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vec = np.zeros(self.dim, dtype=np.float32)
            for token in _tokenize(text):
                digest = hashlib.blake2b(token.encode("utf-8"),
                                         key=self._key,
                                         digest_size=8).digest()
                value = int.from_bytes(digest, "big")
                sign = 1.0 if (value >> 63) & 1 else -1.0
                vec[value % self.dim] += sign
            if not vec.any():
                vec[0] = 1.0
            out.append([float(x) for x in vec])
        return out


class OverlapPairModel:
    """Token-overlap Jaccard scorer: always in [0, 1], no weights."""

    name = "overlap"

    def score(self, query: str, sentences: list[str]) -> list[float]:
        q = set(_tokenize(query))
        scores = []
        for sentence in sentences:
            s = set(_tokenize(sentence))
            union = q | s
            scores.append(len(q & s) / len(union) if union else 0.0)
        return scores


class SentenceTransformerEmbedModel:
    """Bi-encoder checkpoint served via sentence-transformers (mean
    pooling on the output layer, eval mode)."""

    def __init__(self, model_id: str):
        from sentence_transformers import SentenceTransformer

        self.name = model_id
        self._model = SentenceTransformer(model_id)
        self._model.eval()
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def embed(self, texts: list[str]) -> list[list[float]]:
        vectors = self._model.encode(texts, convert_to_numpy=True,
                                     show_progress_bar=False)
        return [[float(x) for x in row.astype(np.float32)] for row in vectors]


class CrossEncoderPairModel:
    """Cross-encoder checkpoint; raw logits are squashed through a
    sigmoid so scores land in [0, 1]."""

    def __init__(self, model_id: str):
        from sentence_transformers import CrossEncoder

        self.name = model_id
        self._model = CrossEncoder(model_id)

    def score(self, query: str, sentences: list[str]) -> list[float]:
        raw = self._model.predict([(query, s) for s in sentences],
                                  show_progress_bar=False)
        raw = np.asarray(raw, dtype=np.float64)
        squashed = 1.0 / (1.0 + np.exp(-raw))
        return [float(min(1.0, max(0.0, s))) for s in squashed]


@dataclass
class ModelRegistry:
    """Everything the service exposes: a name/version for /info plus at
    most one embedding model and one pair model."""

    name: str
    version: str
    embed_spec: dict
    pair_spec: dict
    embed_model: Optional[EmbedModel] = None
    pair_model: Optional[PairModel] = None
    ready: bool = False

    @classmethod
    def from_config(cls, path: str | Path) -> "ModelRegistry":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        return cls(
            name=raw["name"],
            version=str(raw.get("version", "0")),
            embed_spec=raw.get("embed", {}),
            pair_spec=raw.get("pair", {}),
        )

    def load(self) -> None:
        """Instantiate the configured backends; the service answers 503
        until this completes."""
        if self.embed_spec:
            model_id = self.embed_spec["model"]
            if model_id == "hash":
                self.embed_model = HashEmbedModel(
                    dim=int(self.embed_spec.get("dim", 64)),
                    seed=int(self.embed_spec.get("seed", 7)))
            else:
                self.embed_model = SentenceTransformerEmbedModel(model_id)
            logger.info("embed model ready: %s (dim=%d)",
                        self.embed_model.name, self.embed_model.dim)
        if self.pair_spec:
            model_id = self.pair_spec["model"]
            if model_id == "overlap":
                self.pair_model = OverlapPairModel()
            else:
                self.pair_model = CrossEncoderPairModel(model_id)
            logger.info("pair model ready: %s", self.pair_model.name)
        self.ready = True

    def info(self) -> dict:
        payload = {"name": self.name, "version": self.version}
        if self.embed_model is not None:
            payload["dim"] = self.embed_model.dim
        return payload
