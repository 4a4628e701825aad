"""Conformance of a live server against the pipeline's provider
contracts, plus a full pipeline run using the sidecar as both providers.

These tests exercise the real HTTP boundary: a uvicorn server on a local
port, consumed through the pipeline's remote provider clients.
"""

import json
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn
import yaml

from rankpipe_sidecar.app import create_app
from rankpipe_sidecar.models import ModelRegistry

from rankpipe.corpus import CorpusStore, Document
from rankpipe.encoders import RemoteEmbeddingProvider, RemotePairScorer
from rankpipe.evalkit import parse_run
from rankpipe.lexical import build_index_from_store
from rankpipe.pipeline import load_config, run_pipeline
from rankpipe.textnorm import normalize_tokens, split_sentences


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def base_url():
    registry = ModelRegistry(
        name="sidecar-offline", version="1",
        embed_spec={"model": "hash", "dim": 64, "seed": 7},
        pair_spec={"model": "overlap"})
    registry.load()
    port = _free_port()
    config = uvicorn.Config(create_app(registry), host="127.0.0.1",
                            port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("sidecar server did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


class TestProviderConformance:
    def test_info_dim_consistency(self, base_url):
        provider = RemoteEmbeddingProvider(base_url)
        assert provider.name == "sidecar-offline"
        assert provider.dim == 64
        vectors = provider.embed(["one", "two"])
        assert all(v.shape == (64,) for v in vectors)

    def test_embed_ordering_across_batches(self, base_url):
        provider = RemoteEmbeddingProvider(base_url, batch_size=8)
        texts = [f"sentence number {i}" for i in range(20)]
        batched = provider.embed(texts)
        single = [provider.embed([t])[0] for t in texts]
        for a, b in zip(batched, single):
            assert np.array_equal(a, b)

    def test_embed_determinism(self, base_url):
        provider = RemoteEmbeddingProvider(base_url)
        first = provider.embed(["the same text"])[0]
        second = provider.embed(["the same text"])[0]
        assert np.array_equal(first, second)

    def test_pair_scores_in_unit_interval(self, base_url):
        scorer = RemotePairScorer(base_url, batch_size=16)
        sentences = [f"words {i} overlap partially" for i in range(40)]
        scores = scorer.score_pairs("words overlap", sentences)
        assert len(scores) == 40
        assert all(0.0 <= s <= 1.0 for s in scores)

    def test_pair_scores_deterministic_and_ordered(self, base_url):
        scorer = RemotePairScorer(base_url)
        sentences = ["uv light", "kills germs", "uv light kills germs"]
        first = scorer.score_pairs("uv light kills", sentences)
        second = scorer.score_pairs("uv light kills", sentences)
        assert first == second
        reversed_scores = scorer.score_pairs("uv light kills", sentences[::-1])
        assert first == reversed_scores[::-1]


def _make_document(doc_id: str, text: str) -> Document:
    return Document(doc_id=doc_id, lang="en", raw_paragraphs=(text,),
                    sentences=tuple(split_sentences(text, "en")),
                    tokens=tuple(normalize_tokens(text, "en")))


FILLER = ["quartz", "melon", "gravel", "copper", "violet", "amber",
          "falcon", "tundra", "maple", "cobalt", "onyx", "harbor"]


def _planted_setup(tmp_path):
    """Small corpus where each topic's key_conv query appears verbatim in
    exactly one document."""
    rng = np.random.default_rng(7)
    topics = []
    docs = []
    for t in range(3):
        topic_id = f"S{t+1}"
        keyword = f"treatment lynx{t} therapy"
        conversational = f"Does lynx{t} therapy cure illness?"
        topics.append({"topic_id": topic_id, "lang": "en",
                       "keyword": keyword,
                       "conversational": conversational})
        docs.append(_make_document(
            f"p{t}", f"{keyword} {conversational} "
            + " ".join(rng.choice(FILLER, size=5)) + "."))
        for j in range(10):
            words = list(rng.choice(FILLER, size=8))
            words.insert(2, f"lynx{t}")
            docs.append(_make_document(f"x{t}_{j}", " ".join(words) + "."))
    store = CorpusStore(tmp_path / "store", "en")
    store.write(docs)
    index = build_index_from_store(store)
    index.save(tmp_path / "store" / "en.idx")
    topics_path = tmp_path / "topics.jsonl"
    with open(topics_path, "w", encoding="utf-8") as fh:
        for topic in topics:
            fh.write(json.dumps(topic) + "\n")
    return store, topics_path


class TestPipelineWithSidecar:
    def test_full_run_uses_sidecar_for_both_providers(self, base_url,
                                                      tmp_path):
        store, topics_path = _planted_setup(tmp_path)
        config = {
            "run_tag": "sidecar_run",
            "query_lang": "en", "doc_lang": "en",
            "query_type": "key_conv",
            "bi_provider": base_url,
            "cross_provider": base_url,
            "fusion": {"method": "wcombsum", "alpha": 0.5, "beta": 0.4},
            "cutoffs": {"stage1": 20, "stage2": 10, "final": 5},
            "weights": [0.5, 0.3, 0.2],
            "paths": {
                "corpus_store": str(store.directory),
                "index": str(store.directory / "en.idx"),
                "topics": str(topics_path),
                "cache": str(tmp_path / "cache.bin"),
            },
            "output": str(tmp_path / "run.txt"),
        }
        config_path = tmp_path / "run.yaml"
        config_path.write_text(yaml.safe_dump(config), encoding="utf-8")
        out_path, failures = run_pipeline(load_config(config_path))
        assert failures == []
        runs = parse_run(out_path)
        assert len(runs) == 3
        for t in range(3):
            run = runs[f"S{t+1}"]
            run.validate()
            assert len(run.entries) == 5
            assert run.entries[0].doc_id == f"p{t}"
