"""Shared fixtures: synthetic corpora, planted-relevance setups, and
config scaffolding for pipeline tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from rankpipe.corpus import CorpusStore, Document
from rankpipe.lexical import build_index_from_store
from rankpipe.textnorm import normalize_tokens, split_sentences

# Junk vocabulary whose words survive normalization unchanged-ish and are
# never stopwords.
VOCAB = [
    "quartz", "melon", "gravel", "copper", "violet", "amber", "falcon",
    "tundra", "maple", "cobalt", "onyx", "harbor", "lantern", "meadow",
    "prism", "ridge", "summit", "thicket", "velvet", "willow", "zenith",
    "basalt", "cinder", "drift", "ember", "fjord", "glyph", "hollow",
    "ingot", "jasper",
]


def make_document(doc_id: str, text: str, lang: str = "en") -> Document:
    return Document(
        doc_id=doc_id,
        lang=lang,
        raw_paragraphs=(text,),
        sentences=tuple(split_sentences(text, lang)),
        tokens=tuple(normalize_tokens(text, lang)),
    )


def random_corpus(n_docs: int, seed: int = 13,
                  lang: str = "en") -> list[Document]:
    """Synthetic documents of random vocabulary sentences."""
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n_docs):
        n_sentences = int(rng.integers(1, 6))
        sentences = []
        for _ in range(n_sentences):
            words = rng.choice(VOCAB, size=int(rng.integers(3, 12)))
            sentences.append(" ".join(words) + ".")
        docs.append(make_document(f"d{i:04d}", " ".join(sentences), lang))
    return docs


@pytest.fixture(scope="session")
def synthetic_corpus_1000() -> list[Document]:
    return random_corpus(1000, seed=42)


def planted_corpus(tmp_path: Path, paraphrase: bool = False) -> dict:
    """200-document corpus with 5 topics and one planted relevant doc each.

    With ``paraphrase=False`` the planted doc contains the topic's
    key_conv query verbatim as a sentence. With ``paraphrase=True`` the
    relevant doc is a short paraphrase sharing content words, while decoy
    documents stuff repeated query terms into long diluted sentences so
    BM25 prefers the decoys.
    """
    rng = np.random.default_rng(99)
    topics = []
    docs: list[Document] = []
    qrels_rows = []
    for t in range(5):
        topic_id = f"T{t+1}"
        keyword = f"treatment zebra{t} therapy"
        conversational = f"Does zebra{t} therapy cure illness?"
        topics.append({
            "topic_id": topic_id,
            "lang": "en",
            "keyword": keyword,
            "conversational": conversational,
            "explanation": "assessment-time detail only",
        })
        query_text = f"{keyword} {conversational}"
        if not paraphrase:
            filler = " ".join(rng.choice(VOCAB, size=6))
            planted = make_document(
                f"p{t}", f"{query_text} {filler} grows near the river.")
            docs.append(planted)
            qrels_rows.append((topic_id, planted.doc_id, 2))
            for j in range(30):
                words = list(rng.choice(VOCAB, size=10))
                words.insert(3, f"zebra{t}")
                docs.append(make_document(f"x{t}_{j:02d}",
                                          " ".join(words) + "."))
        else:
            relevant = make_document(
                f"p{t}",
                f"A zebra{t} therapy treatment can cure illness. "
                + " ".join(rng.choice(VOCAB, size=8)) + ".")
            docs.append(relevant)
            qrels_rows.append((topic_id, relevant.doc_id, 1))
            # decoys: high term frequency, low per-sentence overlap
            for j in range(15):
                sentences = []
                for _ in range(5):
                    junk = list(rng.choice(VOCAB, size=16))
                    junk.insert(0, f"zebra{t}")
                    junk.insert(8, "therapy")
                    junk.insert(12, "treatment")
                    junk.insert(15, "cure")
                    junk.insert(18, "illness")
                    sentences.append(" ".join(junk) + ".")
                docs.append(make_document(f"x{t}_{j:02d}",
                                          " ".join(sentences)))
            for j in range(15):
                words = list(rng.choice(VOCAB, size=10))
                words.insert(3, f"zebra{t}")
                docs.append(make_document(f"y{t}_{j:02d}",
                                          " ".join(words) + "."))
    while len(docs) < 200:
        i = len(docs)
        docs.append(make_document(
            f"f{i:03d}", " ".join(rng.choice(VOCAB, size=12)) + "."))

    store = CorpusStore(tmp_path / "store", "en")
    store.write(docs)
    index = build_index_from_store(store)
    index_path = tmp_path / "store" / "en.idx"
    index.save(index_path)

    topics_path = tmp_path / "topics.jsonl"
    with open(topics_path, "w", encoding="utf-8") as fh:
        for topic in topics:
            fh.write(json.dumps(topic) + "\n")

    qrels_path = tmp_path / "qrels.txt"
    with open(qrels_path, "w", encoding="utf-8") as fh:
        for qid, doc_id, grade in qrels_rows:
            fh.write(f"{qid} 0 {doc_id} {grade}\n")

    return {
        "store_dir": tmp_path / "store",
        "index_path": index_path,
        "topics_path": topics_path,
        "qrels_path": qrels_path,
        "docs": docs,
        "topics": topics,
    }


def write_config(tmp_path: Path, setup: dict, *, run_tag: str = "test_run",
                 fusion_method: str = "wcombsum", query_type: str = "key_conv",
                 cutoffs=(50, 20, 10), cache: bool = True,
                 bi_provider: str = "hashing", cross_provider: str = "jaccard",
                 output_name: str = "run.txt") -> Path:
    config = {
        "run_tag": run_tag,
        "query_lang": "en",
        "doc_lang": "en",
        "query_type": query_type,
        "bi_provider": bi_provider,
        "cross_provider": cross_provider,
        "fusion": {"method": fusion_method, "alpha": 0.5, "beta": 0.4,
                   "rrf_k": 60},
        "cutoffs": {"stage1": cutoffs[0], "stage2": cutoffs[1],
                    "final": cutoffs[2]},
        "weights": [0.5, 0.3, 0.2],
        "paths": {
            "corpus_store": str(setup["store_dir"]),
            "index": str(setup["index_path"]),
            "topics": str(setup["topics_path"]),
            "cache": str(tmp_path / "cache.bin") if cache else None,
        },
        "output": str(tmp_path / output_name),
    }
    path = tmp_path / f"{run_tag}.yaml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path
