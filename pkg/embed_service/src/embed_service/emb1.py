"""Writer for the harness's EMB1 embedding file format.

Layout: magic b"EMB1", uint32-LE header length, UTF-8 JSON header with
{"dim", "count", "modality", "ids"} plus any extra keys (readers ignore
them), then count x dim float32 little-endian values, row-major. The format
is the interface between this service and the evaluation harness; this
module implements it from the published layout rather than importing the
harness.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"


def write_emb1(
    path: str | Path,
    ids: list[str],
    vectors: np.ndarray,
    modality: str,
    extra_header: dict | None = None,
) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ValueError(
            f"vector matrix shape {vectors.shape} does not match {len(ids)} ids"
        )
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate ids")
    if not np.all(np.isfinite(vectors)):
        raise ValueError("non-finite embedding values")
    header = {
        "dim": int(vectors.shape[1]),
        "count": len(ids),
        "modality": modality,
        "ids": list(ids),
    }
    if extra_header:
        header.update(extra_header)
    header_bytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(vectors.tobytes())
