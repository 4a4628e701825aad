"""Persistent embedding cache.

Append-only log of (provider, text-hash, dim, float32 vector bytes)
records, each followed by a checksum. Records failing their checksum are
dropped at load and recomputed on demand, so a corrupt entry can never
change a downstream score. ``compact()`` rewrites the log as a snapshot.
"""

from __future__ import annotations

import hashlib
import logging
import struct
import threading
from pathlib import Path

import numpy as np

from .encoders import EmbeddingProvider

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<H32sI")  # provider name length, text hash, dim
_CHECKSUM_SIZE = 8


def _text_hash(text: str) -> bytes:
    return hashlib.sha256(text.encode("utf-8")).digest()


def _checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=_CHECKSUM_SIZE).digest()


class EmbeddingCache:
    """File-backed vector cache keyed by (provider name, text hash).

    Concurrent readers are safe; writes are serialized by a lock.
    Values are deterministic, so last-writer-wins on duplicate keys.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[tuple[str, bytes], bytes] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        data = self.path.read_bytes()
        offset = 0
        dropped = 0
        while offset < len(data):
            if offset + _HEADER.size > len(data):
                dropped += 1
                break
            name_len, text_hash, dim = _HEADER.unpack_from(data, offset)
            record_len = _HEADER.size + name_len + dim * 4
            end = offset + record_len + _CHECKSUM_SIZE
            if end > len(data):
                dropped += 1
                break
            record = data[offset:offset + record_len]
            if _checksum(record) != data[offset + record_len:end]:
                dropped += 1
                offset = end
                continue
            name = record[_HEADER.size:_HEADER.size + name_len].decode("utf-8")
            vector_bytes = record[_HEADER.size + name_len:]
            self._entries[(name, text_hash)] = vector_bytes
            offset = end
        if dropped:
            logger.warning("cache %s: dropped %d corrupt record(s)",
                           self.path, dropped)

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, provider_name: str, text: str, dim: int) -> np.ndarray | None:
        vector_bytes = self._entries.get((provider_name, _text_hash(text)))
        if vector_bytes is None:
            return None
        return np.frombuffer(vector_bytes, dtype=np.float32, count=dim).copy()

    def put(self, provider_name: str, text: str, vector: np.ndarray) -> None:
        vector = np.ascontiguousarray(vector, dtype=np.float32)
        name_bytes = provider_name.encode("utf-8")
        text_hash = _text_hash(text)
        record = (_HEADER.pack(len(name_bytes), text_hash, vector.size)
                  + name_bytes + vector.tobytes())
        with self._lock:
            self._entries[(provider_name, text_hash)] = vector.tobytes()
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as fh:
                fh.write(record + _checksum(record))

    def compact(self) -> None:
        """Rewrite the log keeping one record per key."""
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with open(tmp, "wb") as fh:
                for (name, text_hash), vector_bytes in self._entries.items():
                    name_bytes = name.encode("utf-8")
                    dim = len(vector_bytes) // 4
                    record = (_HEADER.pack(len(name_bytes), text_hash, dim)
                              + name_bytes + vector_bytes)
                    fh.write(record + _checksum(record))
            tmp.replace(self.path)


def cache_get_or_compute(cache: EmbeddingCache | None,
                         provider: EmbeddingProvider,
                         texts: list[str]) -> list[np.ndarray]:
    """Vectors equal to provider.embed(texts); misses computed and persisted."""
    if cache is None:
        return provider.embed(texts)
    vectors: list[np.ndarray | None] = []
    missing: list[int] = []
    for i, text in enumerate(texts):
        vec = cache.get(provider.name, text, provider.dim)
        vectors.append(vec)
        if vec is None:
            missing.append(i)
    if missing:
        computed = provider.embed([texts[i] for i in missing])
        for i, vec in zip(missing, computed):
            cache.put(provider.name, texts[i], vec)
            vectors[i] = vec
    return vectors  # type: ignore[return-value]
