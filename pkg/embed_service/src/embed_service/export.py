"""Batch export: embed a corpus manifest and write EMB1 files.

The manifest is the line-delimited JSON corpus format used by the retrieval
harness: ``{"type": "clip", ...}`` rows describe audio clips and
``{"type": "text", ...}`` rows describe captions.  Text rows always carry the
caption inline; clip rows are only embeddable when they point at a decodable
file via ``audio_path``.  The export reads the manifest, runs the requested
backend, and writes the vectors with this package's own EMB1 writer so the
two sides of the pipeline stay coupled only through the file format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .backends import BUILTIN_BACKENDS
from .emb1 import write_emb1


@dataclass(frozen=True)
class ExportReport:
    """What one export run produced."""

    path: Path
    model: str
    modality: str
    n_embedded: int
    n_skipped: int
    skipped_ids: tuple[str, ...]


def _read_manifest(manifest_path: Path) -> list[dict]:
    records = []
    with open(manifest_path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(
                    f"{manifest_path}:{line_no}: not valid JSON: {exc}"
                ) from exc
            if not isinstance(record, dict) or "type" not in record:
                raise ValueError(
                    f"{manifest_path}:{line_no}: expected an object with a 'type' key"
                )
            records.append(record)
    return records


def export_manifest(
    manifest_path: str | Path,
    out_path: str | Path,
    modality: str,
    model: str = "band-profile",
) -> ExportReport:
    """Embed every eligible record of one modality and write an EMB1 file.

    For ``modality="text"`` every text record is embedded from its caption.
    For ``modality="audio"`` only clip records with an ``audio_path`` are
    embedded (paths are resolved relative to the manifest's directory);
    clips without one are skipped and reported, not treated as errors.
    """
    manifest_path = Path(manifest_path)
    out_path = Path(out_path)
    backend = BUILTIN_BACKENDS.get(model)
    if backend is None:
        raise ValueError(f"unknown model tag {model!r}; known: {sorted(BUILTIN_BACKENDS)}")
    if modality not in ("text", "audio"):
        raise ValueError(f"modality must be 'text' or 'audio', got {modality!r}")

    records = _read_manifest(manifest_path)
    ids: list[str] = []
    payloads: list[str] = []
    skipped: list[str] = []

    if modality == "text":
        for record in records:
            if record.get("type") != "text":
                continue
            ids.append(str(record["text_id"]))
            payloads.append(str(record["text"]))
    else:
        base = manifest_path.parent
        for record in records:
            if record.get("type") != "clip":
                continue
            clip_id = str(record["clip_id"])
            audio_path = record.get("audio_path")
            if not audio_path:
                skipped.append(clip_id)
                continue
            ids.append(clip_id)
            payloads.append(str(base / audio_path))

    if not ids:
        raise ValueError(
            f"no embeddable {modality} records in {manifest_path}"
            + (f" ({len(skipped)} clips lack audio_path)" if skipped else "")
        )

    vectors = backend.embed(modality, payloads)
    write_emb1(
        out_path,
        ids,
        vectors,
        modality,
        extra_header={"model": backend.name, "version": backend.version},
    )
    return ExportReport(
        path=out_path,
        model=backend.name,
        modality=modality,
        n_embedded=len(ids),
        n_skipped=len(skipped),
        skipped_ids=tuple(skipped),
    )
