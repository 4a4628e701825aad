"""Provider contracts, cosine similarity, and the embedding cache."""

import hashlib

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankpipe.cache import EmbeddingCache, cache_get_or_compute
from rankpipe.encoders import (
    EmbeddingProvider,
    HashingEmbedder,
    JaccardScorer,
    cosine,
    make_embedding_provider,
    make_pair_scorer,
)
from rankpipe.errors import DimensionMismatch, EmptyBatch, ZeroVector


class CountingEmbedder(HashingEmbedder):
    """Hashing embedder that counts _embed calls, for cache tests."""

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.calls = 0

    def _embed(self, texts):
        self.calls += 1
        return super()._embed(texts)


class TestHashingEmbedder:
    def test_identical_texts_identical_vectors(self):
        provider = HashingEmbedder()
        a, b = provider.embed(["a", "a"])
        assert np.array_equal(a, b)

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            HashingEmbedder().embed([])

    def test_empty_string_rejected(self):
        with pytest.raises(EmptyBatch):
            HashingEmbedder().embed(["ok", ""])

    def test_shape_and_dtype(self):
        provider = HashingEmbedder(dim=64)
        vectors = provider.embed(["the virus spreads", "masks help"])
        assert all(v.shape == (64,) and v.dtype == np.float32 for v in vectors)

    def test_matches_standalone_hash_routine(self):
        # oracle: recompute the bucket/sign placement directly
        provider = HashingEmbedder(dim=64, seed=7)
        vec = provider.embed(["virus"])[0]
        digest = hashlib.blake2b(b"virus", key=b"7", digest_size=8).digest()
        value = int.from_bytes(digest, "big")
        expected = np.zeros(64, dtype=np.float32)
        expected[value % 64] = 1.0 if (value >> 63) & 1 else -1.0
        assert np.array_equal(vec, expected)

    def test_deterministic_across_instances(self):
        v1 = HashingEmbedder().embed(["coronavirus spreads quickly"])[0]
        v2 = HashingEmbedder().embed(["coronavirus spreads quickly"])[0]
        assert np.array_equal(v1, v2)


class TestJaccardScorer:
    def test_identical_sets(self):
        assert JaccardScorer().score_pairs("uv light", ["uv light"]) == [1.0]

    def test_disjoint_sets(self):
        assert JaccardScorer().score_pairs("uv light", ["dark cave"]) == [0.0]

    def test_matches_direct_set_arithmetic(self):
        pairs = [
            ("uv light kills virus", "light kills germs"),
            ("mask mandate", "mask mandate lifted today"),
            ("vaccine works", "vaccines work"),
            ("washing hands", "washing hands with soap helps"),
            ("fever cough", "cough fever fatigue"),
            ("virus", "virus virus virus"),
            ("a b c", "c b a"),
            ("one two", "three four"),
            ("covid spreads indoors", "indoor covid spread is real"),
            ("quarantine rules", "rules of quarantine"),
        ]
        scorer = JaccardScorer()
        for query, sentence in pairs:
            q = set(query.lower().split())
            s = set(sentence.lower().split())
            expected = len(q & s) / len(q | s)
            assert scorer.score_pairs(query, [sentence]) == [pytest.approx(expected)]

    def test_scores_in_unit_interval(self):
        scores = JaccardScorer().score_pairs(
            "uv light", ["uv", "light beam", "uv light", "nothing shared"])
        assert all(0.0 <= s <= 1.0 for s in scores)

    def test_empty_sentences(self):
        with pytest.raises(EmptyBatch):
            JaccardScorer().score_pairs("q", [])


class TestCosine:
    def test_self_similarity_is_one(self):
        x = np.array([0.3, -1.2, 4.0], dtype=np.float32)
        assert cosine(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_computed_value(self):
        u = np.array([1.0, 2.0, 3.0])
        v = np.array([4.0, 5.0, 6.0])
        expected = 32 / (np.sqrt(14) * np.sqrt(77))
        assert cosine(u, v) == pytest.approx(expected, abs=1e-12)
        assert cosine(u, v) == pytest.approx(0.974631, abs=1e-6)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine(np.zeros(3), np.ones(3))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(np.ones(3), np.ones(4))

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=16),
           st.floats(1e-3, 1e3))
    def test_scale_invariance(self, values, alpha):
        u = np.array(values)
        if np.linalg.norm(u) < 1e-6:
            return
        v = np.arange(1, len(values) + 1, dtype=float)
        assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)

    def test_range(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            u = rng.normal(size=8)
            v = rng.normal(size=8)
            assert -1.0 <= cosine(u, v) <= 1.0


class TestEmbeddingCache:
    def test_second_call_hits_cache(self, tmp_path):
        cache = EmbeddingCache(tmp_path / "cache.bin")
        provider = CountingEmbedder()
        texts = ["alpha beta", "gamma delta"]
        first = cache_get_or_compute(cache, provider, texts)
        assert provider.calls == 1
        second = cache_get_or_compute(cache, provider, texts)
        assert provider.calls == 1
        for a, b in zip(first, second):
            assert np.array_equal(a, b)

    def test_bit_identical_after_reload(self, tmp_path):
        path = tmp_path / "cache.bin"
        provider = HashingEmbedder()
        original = cache_get_or_compute(EmbeddingCache(path), provider,
                                        ["the virus mutates"])[0]
        reloaded = EmbeddingCache(path).get(provider.name,
                                            "the virus mutates", provider.dim)
        assert reloaded.tobytes() == original.astype(np.float32).tobytes()

    def test_corrupt_entry_recomputed(self, tmp_path):
        path = tmp_path / "cache.bin"
        provider = CountingEmbedder()
        cache = EmbeddingCache(path)
        cache_get_or_compute(cache, provider, ["resilient text"])
        # flip bytes in the middle of the single record
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        path.write_bytes(bytes(data))

        fresh = EmbeddingCache(path)
        assert len(fresh) == 0  # corrupt record dropped at load
        recomputed = cache_get_or_compute(fresh, provider, ["resilient text"])[0]
        assert np.array_equal(recomputed, provider.embed(["resilient text"])[0])

    def test_partial_keys_mixed_hit_miss(self, tmp_path):
        cache = EmbeddingCache(tmp_path / "cache.bin")
        provider = CountingEmbedder()
        cache_get_or_compute(cache, provider, ["one"])
        out = cache_get_or_compute(cache, provider, ["one", "two"])
        direct = provider.embed(["one", "two"])
        for a, b in zip(out, direct):
            assert np.array_equal(a, b)

    def test_compact_preserves_entries(self, tmp_path):
        path = tmp_path / "cache.bin"
        cache = EmbeddingCache(path)
        provider = HashingEmbedder()
        cache_get_or_compute(cache, provider, ["x y z", "p q r"])
        cache_get_or_compute(cache, provider, ["x y z"])  # duplicate append
        cache.compact()
        fresh = EmbeddingCache(path)
        assert len(fresh) == 2
        assert np.array_equal(
            fresh.get(provider.name, "x y z", provider.dim),
            provider.embed(["x y z"])[0])

    def test_no_cache_passthrough(self):
        provider = HashingEmbedder()
        out = cache_get_or_compute(None, provider, ["plain"])
        assert np.array_equal(out[0], provider.embed(["plain"])[0])


class TestProviderFactories:
    def test_builtin_names(self):
        assert isinstance(make_embedding_provider("hashing"), EmbeddingProvider)
        assert isinstance(make_pair_scorer("jaccard"), JaccardScorer)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_embedding_provider("nonexistent")
        with pytest.raises(ValueError):
            make_pair_scorer("nonexistent")
