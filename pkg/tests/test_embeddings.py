"""Binary embedding format, cosine similarity, late fusion."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from audiobench.embeddings import (
    MAGIC,
    EmbeddingSet,
    Modality,
    SimilarityMatrix,
    cosine_similarity,
    fuse,
    load_embeddings,
    save_embeddings,
)
from audiobench.errors import FormatError, IntegrityError


def embedding_set(n=4, dim=3, seed=0, modality=Modality.TEXT, prefix="e"):
    rng = np.random.default_rng(seed)
    return EmbeddingSet(
        ids=tuple(f"{prefix}{i}" for i in range(n)),
        vectors=rng.normal(size=(n, dim)).astype(np.float32),
        modality=modality,
    )


class TestFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        original = embedding_set(n=7, dim=5, seed=3)
        path = tmp_path / "x.emb1"
        save_embeddings(original, path)
        loaded = load_embeddings(path)
        assert loaded.ids == original.ids
        assert loaded.modality == original.modality
        assert loaded.vectors.dtype == np.float32
        assert loaded.vectors.tobytes() == original.vectors.tobytes()

    def test_awkward_float_values_survive(self, tmp_path):
        vectors = np.array(
            [[-0.0, 1e-40, 3.4e38], [1.0, -1.0, 2**-24]], dtype=np.float32
        )
        original = EmbeddingSet(ids=("a", "b"), vectors=vectors, modality=Modality.AUDIO)
        path = tmp_path / "x.emb1"
        save_embeddings(original, path)
        assert load_embeddings(path).vectors.tobytes() == vectors.tobytes()

    def test_header_layout(self, tmp_path):
        path = tmp_path / "x.emb1"
        save_embeddings(embedding_set(n=2, dim=2), path)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC
        (header_len,) = struct.unpack("<I", raw[4:8])
        assert raw[8 : 8 + header_len].startswith(b"{")
        assert len(raw) == 8 + header_len + 2 * 2 * 4

    def test_extra_header_keys_ignored(self, tmp_path):
        path = tmp_path / "x.emb1"
        save_embeddings(
            embedding_set(n=2, dim=2), path, extra_header={"model": "toy-v1"}
        )
        loaded = load_embeddings(path)
        assert loaded.ids == ("e0", "e1")

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "x.emb1"
        save_embeddings(embedding_set(), path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="magic"):
            load_embeddings(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "x.emb1"
        save_embeddings(embedding_set(), path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])
        with pytest.raises(FormatError):
            load_embeddings(path)

    def test_truncated_header_rejected(self, tmp_path):
        path = tmp_path / "x.emb1"
        path.write_bytes(MAGIC + b"\x00")
        with pytest.raises(FormatError):
            load_embeddings(path)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(IntegrityError):
            EmbeddingSet(
                ids=("a", "a"),
                vectors=np.zeros((2, 2), dtype=np.float32),
                modality=Modality.TEXT,
            )

    def test_subset_orders_and_validates(self):
        emb = embedding_set(n=4, dim=2)
        sub = emb.subset(["e2", "e0"])
        assert sub.ids == ("e2", "e0")
        assert np.array_equal(sub.vectors[0], emb.vectors[2])
        with pytest.raises(IntegrityError):
            emb.subset(["e0", "missing"])


class TestCosine:
    def test_against_high_precision_oracle(self):
        rng = np.random.default_rng(11)
        q = embedding_set(n=6, dim=16, seed=1, prefix="q")
        i = embedding_set(n=5, dim=16, seed=2, modality=Modality.AUDIO, prefix="i")
        sim = cosine_similarity(q, i)
        for a in range(6):
            for b in range(5):
                x = q.vectors[a].astype(np.float64)
                y = i.vectors[b].astype(np.float64)
                expected = float(
                    np.dot(x, y) / (np.linalg.norm(x) * np.linalg.norm(y))
                )
                assert abs(sim.scores[a, b] - expected) < 1e-12

    def test_zero_vector_scores_zero(self):
        q = EmbeddingSet(
            ids=("q0", "q1"),
            vectors=np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.float32),
            modality=Modality.TEXT,
        )
        i = EmbeddingSet(
            ids=("i0",),
            vectors=np.array([[1.0, 1.0]], dtype=np.float32),
            modality=Modality.AUDIO,
        )
        sim = cosine_similarity(q, i)
        assert sim.scores[0, 0] == 0.0
        assert sim.scores[1, 0] != 0.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(IntegrityError):
            cosine_similarity(embedding_set(dim=3), embedding_set(dim=4, prefix="i"))

    def test_self_similarity_is_one(self):
        emb = embedding_set(n=5, dim=8, seed=4)
        sim = cosine_similarity(emb, emb)
        assert np.allclose(np.diag(sim.scores), 1.0, atol=1e-6)


def sim_matrix(scores, prefix_q="q", prefix_i="i"):
    scores = np.asarray(scores, dtype=float)
    return SimilarityMatrix(
        query_ids=tuple(f"{prefix_q}{r}" for r in range(scores.shape[0])),
        item_ids=tuple(f"{prefix_i}{c}" for c in range(scores.shape[1])),
        scores=scores,
    )


class TestFuse:
    def test_weighted_sum_of_normalized(self):
        a = sim_matrix([[0.0, 1.0], [2.0, 3.0]])
        b = sim_matrix([[3.0, 1.0], [0.0, 2.0]])
        fused = fuse([a, b], (0.5, 0.5))
        na = (a.scores - 0.0) / 3.0
        nb = (b.scores - 0.0) / 3.0
        assert np.allclose(fused.scores, 0.5 * na + 0.5 * nb)

    def test_weights_normalized(self):
        a = sim_matrix([[0.0, 1.0], [2.0, 3.0]])
        b = sim_matrix([[3.0, 1.0], [0.0, 2.0]])
        assert np.allclose(
            fuse([a, b], (2.0, 2.0)).scores, fuse([a, b], (0.5, 0.5)).scores
        )

    def test_constant_matrix_contributes_zeros(self):
        a = sim_matrix([[5.0, 5.0], [5.0, 5.0]])
        b = sim_matrix([[0.0, 1.0], [2.0, 3.0]])
        fused = fuse([a, b], (0.5, 0.5))
        assert np.allclose(fused.scores, 0.5 * (b.scores / 3.0))

    def test_single_matrix_identity_ranking(self):
        a = sim_matrix([[0.0, 4.0], [2.0, 3.0]])
        fused = fuse([a], (1.0,))
        assert np.array_equal(
            np.argsort(-fused.scores, axis=1), np.argsort(-a.scores, axis=1)
        )

    def test_id_order_mismatch_rejected(self):
        a = sim_matrix([[0.0, 1.0]])
        b = SimilarityMatrix(
            query_ids=("q0",), item_ids=("i1", "i0"), scores=np.array([[0.0, 1.0]])
        )
        with pytest.raises(IntegrityError):
            fuse([a, b], (0.5, 0.5))

    def test_bad_weights_rejected(self):
        a = sim_matrix([[0.0, 1.0]])
        b = sim_matrix([[1.0, 0.0]])
        with pytest.raises(IntegrityError):
            fuse([a, b], (0.5,))
        with pytest.raises(IntegrityError):
            fuse([a, b], (-1.0, 2.0))
        with pytest.raises(IntegrityError):
            fuse([a, b], (0.0, 0.0))
        with pytest.raises(IntegrityError):
            fuse([], ())

    @given(
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=40)
    def test_fused_scores_in_unit_interval(self, n_q, n_i, seed):
        rng = np.random.default_rng(seed)
        a = sim_matrix(rng.normal(size=(n_q, n_i)))
        b = sim_matrix(rng.normal(size=(n_q, n_i)))
        fused = fuse([a, b], (0.3, 0.7))
        assert np.all(fused.scores >= -1e-12)
        assert np.all(fused.scores <= 1.0 + 1e-12)
