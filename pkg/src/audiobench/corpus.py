"""Corpus ingestion: manifests, audio energy, silence flags, word statistics.

A corpus is loaded once from a line-delimited JSON manifest (record types
``clip`` and ``text``, schema in the README) and never mutated afterwards, so
it is safe to share across threads. Audio is referenced either by a relative
WAV path or by precomputed ``rms_energy``/``is_silent`` fields, which lets the
harness run without any raw audio on disk.
"""

from __future__ import annotations

import json
import math
import wave
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DecodeError,
    DegenerateInputError,
    IntegrityError,
    ManifestParseError,
)

DEFAULT_SILENCE_THRESHOLD = 1e-4


class TextKind(str, Enum):
    VISUAL_CAPTION = "visual_caption"
    AUDIO_CLASS_LABEL = "audio_class_label"
    LLM_AUDIO_CAPTION = "llm_audio_caption"


class ManifestFormat(str, Enum):
    JSONL = "jsonl"
    JSON = "json"


@dataclass(frozen=True)
class AudioTrack:
    """Mono audio evidence for one clip.

    ``samples`` are amplitudes in [-1, 1]; either may be absent when the
    manifest only ships a precomputed energy or silence flag.
    """

    sample_rate: int | None = None
    samples: np.ndarray | None = None
    rms_energy: float | None = None
    is_silent: bool = False

    def __post_init__(self):
        if self.rms_energy is not None and not self.rms_energy >= 0:
            raise IntegrityError(f"rms_energy must be >= 0, got {self.rms_energy}")


@dataclass(frozen=True)
class McqPair:
    """A source multiple-choice pairing attached to a text record."""

    candidates: tuple[str, ...]
    answer_index: int
    task: str  # "intra" | "inter"


@dataclass(frozen=True)
class MediaClip:
    clip_id: str
    source_video_id: str
    start_s: float
    end_s: float
    dataset_tag: str = ""
    audio: AudioTrack | None = None

    def __post_init__(self):
        if not self.end_s > self.start_s:
            raise IntegrityError(
                f"clip {self.clip_id!r}: end_s ({self.end_s}) must exceed start_s ({self.start_s})"
            )

    @property
    def is_silent(self) -> bool:
        return self.audio is None or self.audio.is_silent


@dataclass(frozen=True)
class Description:
    text_id: str
    text: str
    kind: TextKind
    clip_ids: tuple[str, ...] = ()
    verbs: frozenset[str] | None = None
    nouns: frozenset[str] | None = None
    mcq: McqPair | None = None

    def __post_init__(self):
        if not self.text:
            raise IntegrityError(f"text {self.text_id!r}: text must be nonempty")


@dataclass(frozen=True)
class CorpusStats:
    n_clips: int
    n_texts: int
    n_silent: int
    mean_words: float
    std_words: float


@dataclass
class Corpus:
    """Immutable-by-convention container for clips and descriptions."""

    clips: dict[str, MediaClip] = field(default_factory=dict)
    texts: dict[str, Description] = field(default_factory=dict)

    @property
    def n_clips(self) -> int:
        return len(self.clips)

    @property
    def n_texts(self) -> int:
        return len(self.texts)

    def texts_of_kind(self, kind: TextKind | None) -> list[Description]:
        if kind is None:
            return list(self.texts.values())
        return [t for t in self.texts.values() if t.kind == kind]

    def mcq_pairs(self, task: str) -> list[Description]:
        return [t for t in self.texts.values() if t.mcq is not None and t.mcq.task == task]

    def audible_clip_ids(self) -> list[str]:
        return [c.clip_id for c in self.clips.values() if not c.is_silent]


def rms(samples: np.ndarray) -> float:
    """Root-mean-square of an amplitude buffer; 0.0 for an empty buffer."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.square(x))))


def detect_silence(track: AudioTrack | None, threshold: float = DEFAULT_SILENCE_THRESHOLD) -> bool:
    """True iff the track is absent or its RMS energy is below ``threshold``.

    A track that carries neither samples nor a precomputed energy falls back
    to its own ``is_silent`` flag (the manifest's word is final there).
    """
    if track is None:
        return True
    if track.samples is not None:
        return rms(track.samples) < threshold
    if track.rms_energy is not None:
        return track.rms_energy < threshold
    return track.is_silent


def read_wav_mono(path: Path) -> tuple[int, np.ndarray]:
    """Decode a 16-bit PCM WAV into (sample_rate, mono float array in [-1, 1])."""
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            rate = wf.getframerate()
            frames = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise DecodeError(f"cannot decode WAV {path}: {exc}") from exc
    if sampwidth != 2:
        raise DecodeError(f"cannot decode WAV {path}: expected 16-bit PCM, got {8 * sampwidth}-bit")
    data = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return rate, data


def _load_audio(
    record: dict,
    base_dir: Path,
    threshold: float,
    silent_on_decode_error: bool,
) -> AudioTrack | None:
    path = record.get("audio_path")
    explicit_silent = record.get("is_silent")
    if path is not None:
        try:
            rate, samples = read_wav_mono(base_dir / path)
        except DecodeError:
            if not silent_on_decode_error:
                raise
            return None
        energy = rms(samples)
        silent = explicit_silent if explicit_silent is not None else energy < threshold
        return AudioTrack(sample_rate=rate, samples=samples, rms_energy=energy, is_silent=silent)
    if record.get("rms_energy") is not None:
        energy = float(record["rms_energy"])
        silent = explicit_silent if explicit_silent is not None else energy < threshold
        return AudioTrack(rms_energy=energy, is_silent=silent)
    if explicit_silent is not None:
        return AudioTrack(is_silent=bool(explicit_silent))
    return None  # no audio evidence at all: absent stream


def _clip_from_record(record: dict, base_dir, threshold, silent_on_decode_error) -> MediaClip:
    return MediaClip(
        clip_id=record["clip_id"],
        source_video_id=record["video_id"],
        start_s=float(record["start_s"]),
        end_s=float(record["end_s"]),
        dataset_tag=record.get("dataset", ""),
        audio=_load_audio(record, base_dir, threshold, silent_on_decode_error),
    )


def _text_from_record(record: dict) -> Description:
    mcq = None
    if record.get("mcq") is not None:
        m = record["mcq"]
        mcq = McqPair(
            candidates=tuple(m["candidates"]),
            answer_index=int(m["answer_index"]),
            task=m.get("task", "inter"),
        )
        if mcq.task not in ("intra", "inter"):
            raise IntegrityError(f"text {record['text_id']!r}: unknown mcq task {mcq.task!r}")
        if not 0 <= mcq.answer_index < len(mcq.candidates):
            raise IntegrityError(f"text {record['text_id']!r}: answer_index out of range")
    verbs = record.get("verbs")
    nouns = record.get("nouns")
    return Description(
        text_id=record["text_id"],
        text=record["text"],
        kind=TextKind(record["kind"]),
        clip_ids=tuple(record.get("clip_ids", ())),
        verbs=frozenset(w.lower() for w in verbs) if verbs is not None else None,
        nouns=frozenset(w.lower() for w in nouns) if nouns is not None else None,
        mcq=mcq,
    )


def _iter_records(path: Path, fmt: ManifestFormat):
    if fmt == ManifestFormat.JSONL:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield lineno, json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ManifestParseError(f"invalid JSON ({exc.msg})", path, lineno) from exc
    else:
        try:
            records = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ManifestParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from exc
        if not isinstance(records, list):
            raise ManifestParseError("top-level JSON must be an array of records", path, 1)
        for i, record in enumerate(records, start=1):
            yield i, record


def load_manifest(
    path: str | Path,
    fmt: ManifestFormat | str = ManifestFormat.JSONL,
    *,
    silence_threshold: float = DEFAULT_SILENCE_THRESHOLD,
    silent_on_decode_error: bool = False,
) -> Corpus:
    """Load clips and texts from a manifest and resolve all cross-references.

    Raises ManifestParseError with the offending line number on malformed
    records, IntegrityError on duplicate ids or dangling clip references.
    """
    path = Path(path)
    fmt = ManifestFormat(fmt)
    base_dir = path.parent
    clips: dict[str, MediaClip] = {}
    texts: dict[str, Description] = {}
    for lineno, record in _iter_records(path, fmt):
        if not isinstance(record, dict) or "type" not in record:
            raise ManifestParseError("record must be an object with a 'type' field", path, lineno)
        try:
            if record["type"] == "clip":
                clip = _clip_from_record(record, base_dir, silence_threshold, silent_on_decode_error)
                if clip.clip_id in clips:
                    raise IntegrityError(f"duplicate clip_id {clip.clip_id!r}")
                clips[clip.clip_id] = clip
            elif record["type"] == "text":
                text = _text_from_record(record)
                if text.text_id in texts:
                    raise IntegrityError(f"duplicate text_id {text.text_id!r}")
                texts[text.text_id] = text
            else:
                raise ManifestParseError(f"unknown record type {record['type']!r}", path, lineno)
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestParseError(f"malformed {record.get('type', '?')} record: {exc}", path, lineno) from exc

    for text in texts.values():
        for clip_id in text.clip_ids:
            if clip_id not in clips:
                raise IntegrityError(
                    f"text {text.text_id!r} references unknown clip {clip_id!r}"
                )
        if text.mcq is not None:
            for clip_id in text.mcq.candidates:
                if clip_id not in clips:
                    raise IntegrityError(
                        f"mcq pair {text.text_id!r} references unknown clip {clip_id!r}"
                    )
    return Corpus(clips=clips, texts=texts)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a normalized manifest (resolved energies and silence flags).

    The output is itself loadable by :func:`load_manifest`; decoded sample
    buffers are not re-serialized, only their RMS energy.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for clip in corpus.clips.values():
            record = {
                "type": "clip",
                "clip_id": clip.clip_id,
                "video_id": clip.source_video_id,
                "start_s": clip.start_s,
                "end_s": clip.end_s,
                "dataset": clip.dataset_tag,
            }
            if clip.audio is not None:
                if clip.audio.rms_energy is not None:
                    record["rms_energy"] = clip.audio.rms_energy
                record["is_silent"] = clip.audio.is_silent
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
        for text in corpus.texts.values():
            record = {
                "type": "text",
                "text_id": text.text_id,
                "text": text.text,
                "kind": text.kind.value,
                "clip_ids": list(text.clip_ids),
            }
            if text.verbs is not None:
                record["verbs"] = sorted(text.verbs)
            if text.nouns is not None:
                record["nouns"] = sorted(text.nouns)
            if text.mcq is not None:
                record["mcq"] = {
                    "candidates": list(text.mcq.candidates),
                    "answer_index": text.mcq.answer_index,
                    "task": text.mcq.task,
                }
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def corpus_stats(corpus: Corpus, kind: TextKind | None = None) -> CorpusStats:
    """Word-count statistics (whitespace tokens, population std) over texts of ``kind``."""
    selected = corpus.texts_of_kind(kind)
    if not selected:
        raise DegenerateInputError(
            f"no texts of kind {kind.value if kind else '<any>'} in corpus"
        )
    counts = [len(t.text.split()) for t in selected]
    mean = sum(counts) / len(counts)
    var = sum((c - mean) ** 2 for c in counts) / len(counts)
    return CorpusStats(
        n_clips=corpus.n_clips,
        n_texts=len(selected),
        n_silent=sum(1 for c in corpus.clips.values() if c.is_silent),
        mean_words=mean,
        std_words=math.sqrt(var),
    )
