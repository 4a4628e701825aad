"""Corpus ingestion and storage.

Raw documents arrive as XML; only the text inside ``<p>`` tags is kept.
Documents are persisted one JSON object per line in per-language store
files so downstream stages never re-parse XML, with a stats sidecar
holding the corpus aggregates used by BM25 and sentence selection.
"""

from __future__ import annotations

import html
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import CorruptStore, EmptyCorpus, MalformedInput
from .textnorm import normalize_tokens, split_sentences

logger = logging.getLogger(__name__)

_PARAGRAPH_RE = re.compile(r"<p(?:\s[^>]*)?>(.*?)</p\s*>", re.IGNORECASE | re.DOTALL)
_TAG_RE = re.compile(r"<[^>]+>")


@dataclass(frozen=True)
class Document:
    """One corpus document after ingestion. Immutable and thread-safe."""

    doc_id: str
    lang: str
    raw_paragraphs: tuple[str, ...]
    sentences: tuple[str, ...]
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")


@dataclass(frozen=True)
class CorpusStats:
    """Corpus-level aggregates: document count, mean token count, mean
    sentence count."""

    doc_count: int
    avgdl: float
    avg_sentences: float


def extract_paragraphs(raw_xml: str) -> list[str]:
    """Text content of every ``<p>`` element in document order.

    Nested markup inside a paragraph is stripped; entities are unescaped.
    """
    paragraphs = []
    for match in _PARAGRAPH_RE.finditer(raw_xml):
        text = html.unescape(_TAG_RE.sub(" ", match.group(1)))
        text = " ".join(text.split())
        if text:
            paragraphs.append(text)
    return paragraphs


def ingest_document(raw_xml: str, doc_id: str, lang: str) -> Document:
    """Build a Document from raw XML, keeping only ``<p>``-tag text."""
    paragraphs = extract_paragraphs(raw_xml)
    if not paragraphs:
        raise MalformedInput(f"document {doc_id!r}: no extractable <p> paragraphs")
    body = " ".join(paragraphs)
    sentences = split_sentences(body, lang)
    tokens = normalize_tokens(body, lang)
    return Document(
        doc_id=doc_id,
        lang=lang,
        raw_paragraphs=tuple(paragraphs),
        sentences=tuple(sentences),
        tokens=tuple(tokens),
    )


def compute_corpus_stats(corpus: Iterable[Document]) -> CorpusStats:
    """Exact arithmetic means of token and sentence counts."""
    doc_count = 0
    total_tokens = 0
    total_sentences = 0
    for doc in corpus:
        doc_count += 1
        total_tokens += len(doc.tokens)
        total_sentences += len(doc.sentences)
    if doc_count == 0:
        raise EmptyCorpus("cannot compute stats of an empty corpus")
    return CorpusStats(
        doc_count=doc_count,
        avgdl=total_tokens / doc_count,
        avg_sentences=total_sentences / doc_count,
    )


class CorpusStore:
    """Per-language corpus store: line-delimited JSON records plus a
    ``.stats.json`` sidecar.

    Single writer during build; any number of concurrent readers after.
    """

    def __init__(self, directory: str | Path, lang: str):
        self.directory = Path(directory)
        self.lang = lang
        self.store_path = self.directory / f"{lang}.jsonl"
        self.stats_path = self.directory / f"{lang}.stats.json"

    def write(self, documents: Iterable[Document]) -> CorpusStats:
        self.directory.mkdir(parents=True, exist_ok=True)
        doc_count = 0
        total_tokens = 0
        total_sentences = 0
        with open(self.store_path, "w", encoding="utf-8") as fh:
            for doc in documents:
                record = {
                    "doc_id": doc.doc_id,
                    "lang": doc.lang,
                    "sentences": list(doc.sentences),
                    "tokens": list(doc.tokens),
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                doc_count += 1
                total_tokens += len(doc.tokens)
                total_sentences += len(doc.sentences)
        if doc_count == 0:
            self.store_path.unlink()
            raise EmptyCorpus("no documents written to store")
        stats = CorpusStats(
            doc_count=doc_count,
            avgdl=total_tokens / doc_count,
            avg_sentences=total_sentences / doc_count,
        )
        with open(self.stats_path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "doc_count": stats.doc_count,
                    "avgdl": stats.avgdl,
                    "avg_sentences": stats.avg_sentences,
                },
                fh,
            )
        return stats

    def read(self) -> Iterator[Document]:
        if not self.store_path.exists():
            raise EmptyCorpus(f"store file {self.store_path} does not exist")
        with open(self.store_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    yield Document(
                        doc_id=record["doc_id"],
                        lang=record["lang"],
                        raw_paragraphs=(),
                        sentences=tuple(record["sentences"]),
                        tokens=tuple(record["tokens"]),
                    )
                except (ValueError, KeyError) as exc:
                    raise CorruptStore(
                        f"{self.store_path}:{line_no}: bad record ({exc})"
                    ) from exc

    def read_all(self) -> dict[str, Document]:
        """Load the full store keyed by doc_id."""
        return {doc.doc_id: doc for doc in self.read()}

    def stats(self) -> CorpusStats:
        with open(self.stats_path, encoding="utf-8") as fh:
            data = json.load(fh)
        return CorpusStats(
            doc_count=data["doc_count"],
            avgdl=data["avgdl"],
            avg_sentences=data["avg_sentences"],
        )


@dataclass
class ManifestEntry:
    path: str
    doc_id: str
    lang: str


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    """Manifest mapping input file -> (doc_id, lang), one JSON object per line."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            entries.append(
                ManifestEntry(
                    path=record["path"],
                    doc_id=record["doc_id"],
                    lang=record["lang"],
                )
            )
    return entries


def ingest_directory(
    input_dir: str | Path, manifest_path: str | Path, out_dir: str | Path
) -> dict[str, CorpusStats]:
    """Ingest every manifest entry, writing one store per language.

    Documents that yield no paragraphs are skipped with a warning.
    """
    input_dir = Path(input_dir)
    by_lang: dict[str, list[Document]] = {}
    for entry in read_manifest(manifest_path):
        raw = (input_dir / entry.path).read_text(encoding="utf-8")
        try:
            doc = ingest_document(raw, entry.doc_id, entry.lang)
        except MalformedInput as exc:
            logger.warning("skipping %s: %s", entry.doc_id, exc)
            continue
        by_lang.setdefault(entry.lang, []).append(doc)
    stats_by_lang = {}
    for lang, docs in by_lang.items():
        store = CorpusStore(out_dir, lang)
        stats_by_lang[lang] = store.write(docs)
    return stats_by_lang
