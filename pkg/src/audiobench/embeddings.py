"""Embedding sets, the EMB1 binary format, cosine similarity, and late fusion.

EMB1 layout: magic b"EMB1", uint32-LE header length, UTF-8 JSON header with
at least {"dim", "count", "modality", "ids"} (extra keys such as a model tag
are preserved but ignored here), then count x dim float32 little-endian
values, row-major. Encoders export this format; the harness only reads it.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import FormatError, IntegrityError

MAGIC = b"EMB1"


class Modality(str, Enum):
    TEXT = "text"
    AUDIO = "audio"
    VIDEO = "video"


@dataclass(frozen=True)
class EmbeddingSet:
    ids: tuple[str, ...]
    vectors: np.ndarray  # shape (len(ids), dim), float32
    modality: Modality

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.ids):
            raise IntegrityError(
                f"vector matrix shape {self.vectors.shape} does not match {len(self.ids)} ids"
            )
        if len(set(self.ids)) != len(self.ids):
            raise IntegrityError("duplicate ids in embedding set")
        if not np.all(np.isfinite(self.vectors)):
            raise IntegrityError("embedding vectors contain non-finite values")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def subset(self, ids) -> "EmbeddingSet":
        """Rows for the given ids, in the given order."""
        index = {eid: k for k, eid in enumerate(self.ids)}
        missing = [eid for eid in ids if eid not in index]
        if missing:
            raise IntegrityError(
                f"{len(missing)} ids missing from embedding set, e.g. {missing[:3]}"
            )
        rows = np.array([index[eid] for eid in ids], dtype=int)
        return EmbeddingSet(
            ids=tuple(ids), vectors=self.vectors[rows], modality=self.modality
        )


def save_embeddings(embeddings: EmbeddingSet, path: str | Path, extra_header: dict | None = None) -> None:
    header = {
        "dim": embeddings.dim,
        "count": len(embeddings.ids),
        "modality": embeddings.modality.value,
        "ids": list(embeddings.ids),
    }
    if extra_header:
        header.update(extra_header)
    header_bytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    payload = np.ascontiguousarray(embeddings.vectors, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def load_embeddings(path: str | Path) -> EmbeddingSet:
    """Read an EMB1 file, validating magic, header consistency, and finiteness."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 8:
        raise FormatError(f"{path}: truncated header")
    (header_len,) = struct.unpack("<I", blob[4:8])
    header_end = 8 + header_len
    if len(blob) < header_end:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(blob[8:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header: {exc}") from exc
    for key in ("dim", "count", "modality", "ids"):
        if key not in header:
            raise FormatError(f"{path}: header missing {key!r}")
    dim, count = int(header["dim"]), int(header["count"])
    ids = tuple(header["ids"])
    if len(ids) != count:
        raise FormatError(f"{path}: header count {count} != {len(ids)} ids")
    expected = count * dim * 4
    payload = blob[header_end:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected} for {count}x{dim}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
    if not np.all(np.isfinite(vectors)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return EmbeddingSet(ids=ids, vectors=vectors, modality=Modality(header["modality"]))


@dataclass(frozen=True)
class SimilarityMatrix:
    query_ids: tuple[str, ...]
    item_ids: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        if self.scores.shape != (len(self.query_ids), len(self.item_ids)):
            raise IntegrityError(
                f"score matrix shape {self.scores.shape} does not match axes "
                f"({len(self.query_ids)}, {len(self.item_ids)})"
            )
        if not np.all(np.isfinite(self.scores)):
            raise IntegrityError("similarity scores contain non-finite values")

    def transposed(self) -> "SimilarityMatrix":
        return SimilarityMatrix(
            query_ids=self.item_ids, item_ids=self.query_ids, scores=self.scores.T.copy()
        )


def cosine_similarity(queries: EmbeddingSet, items: EmbeddingSet) -> SimilarityMatrix:
    """Pairwise cosine scores; zero vectors score 0 against everything."""
    if queries.dim != items.dim:
        raise IntegrityError(f"dimension mismatch: {queries.dim} vs {items.dim}")
    q = queries.vectors.astype(np.float64)
    i = items.vectors.astype(np.float64)
    qn = np.linalg.norm(q, axis=1)
    inorm = np.linalg.norm(i, axis=1)
    qn_safe = np.where(qn == 0.0, 1.0, qn)
    in_safe = np.where(inorm == 0.0, 1.0, inorm)
    scores = (q / qn_safe[:, None]) @ (i / in_safe[:, None]).T
    scores[qn == 0.0, :] = 0.0
    scores[:, inorm == 0.0] = 0.0
    return SimilarityMatrix(query_ids=queries.ids, item_ids=items.ids, scores=scores)


def fuse(matrices: list[SimilarityMatrix], weights) -> SimilarityMatrix:
    """Late fusion: min-max normalize each matrix over its own entries, then
    weighted-sum with weights normalized to 1.

    All matrices must share identical query and item orderings. A constant
    matrix normalizes to all zeros (it carries no ranking information).
    """
    if not matrices:
        raise IntegrityError("fuse needs at least one matrix")
    w = np.asarray(list(weights), dtype=np.float64)
    if len(w) != len(matrices):
        raise IntegrityError(f"{len(matrices)} matrices but {len(w)} weights")
    if np.any(w < 0):
        raise IntegrityError("fusion weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise IntegrityError("fusion weights must sum to a positive value")
    w = w / total
    first = matrices[0]
    for m in matrices[1:]:
        if m.query_ids != first.query_ids or m.item_ids != first.item_ids:
            raise IntegrityError("fuse requires identical id orderings across matrices")
    fused = np.zeros_like(first.scores, dtype=np.float64)
    for weight, m in zip(w, matrices):
        lo, hi = float(m.scores.min()), float(m.scores.max())
        if hi > lo:
            normalized = (m.scores - lo) / (hi - lo)
        else:
            normalized = np.zeros_like(m.scores, dtype=np.float64)
        fused += weight * normalized
    return SimilarityMatrix(query_ids=first.query_ids, item_ids=first.item_ids, scores=fused)
