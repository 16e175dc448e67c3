"""Benchmark assembly: retrieval sets, five-way MCQ items, silence filtering.

Three shapes come out of here: MIR-style retrieval over captions, class-label
retrieval, and intra/inter-video MCQ. All of them exclude silent clips; the
MCQ builders additionally repair or drop items according to the rules below,
and every dropped input is recorded with a machine-readable reason so that
dropped + emitted always equals the input count.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import Corpus, TextKind
from .errors import DegenerateInputError, FormatError, IntegrityError
from .relevance import (
    Grade,
    MatrixKind,
    RelevanceMatrix,
    build_caption_matrix,
    build_class_matrix,
    load_relevance,
    save_relevance,
)


class McqKind(str, Enum):
    INTRA = "intra"
    INTER = "inter"


class Task(str, Enum):
    RETRIEVAL = "retrieval"
    MCQ = "mcq"


@dataclass(frozen=True)
class MCQItem:
    """One query text with candidate clips, one of which is the ground truth."""

    query_text_id: str
    candidates: tuple[str, ...]
    answer_index: int
    kind: McqKind

    def __post_init__(self):
        if len(self.candidates) != len(set(self.candidates)):
            raise IntegrityError(
                f"mcq item {self.query_text_id!r} has duplicate candidates"
            )
        if not 0 <= self.answer_index < len(self.candidates):
            raise IntegrityError(
                f"mcq item {self.query_text_id!r}: answer index {self.answer_index} "
                f"outside 0..{len(self.candidates) - 1}"
            )


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    task: Task
    text_kind: TextKind
    relevance_kind: MatrixKind | None = None
    grade_filter: Grade | None = None


@dataclass(frozen=True)
class DropRecord:
    """Why one input was not emitted; the audit log is a list of these."""

    stage: str
    reason: str
    ref: str
    detail: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class RetrievalBenchmark:
    spec: BenchmarkSpec
    query_ids: tuple[str, ...]
    item_ids: tuple[str, ...]
    query_texts: dict[str, str]
    relevance: RelevanceMatrix
    dropped: tuple[DropRecord, ...] = ()


@dataclass(frozen=True)
class McqBenchmark:
    spec: BenchmarkSpec
    items: tuple[MCQItem, ...]
    query_texts: dict[str, str]
    dropped: tuple[DropRecord, ...] = ()


def _audible_subset(corpus: Corpus, text_kind: TextKind, stage: str):
    """Corpus restricted to audible clips referenced by texts of the kind.

    Texts keep their order; a text whose every ground-truth clip is silent is
    dropped (it could never be satisfied) and recorded.
    """
    texts = corpus.texts_of_kind(text_kind)
    if not texts:
        raise DegenerateInputError(f"no texts of kind {text_kind.value!r}")
    referenced = {cid for t in texts for cid in t.clip_ids}
    dropped: list[DropRecord] = []
    kept_clips = {}
    for cid, clip in corpus.clips.items():
        if cid not in referenced:
            continue
        if clip.is_silent:
            dropped.append(DropRecord(stage=stage, reason="silent_clip", ref=cid))
        else:
            kept_clips[cid] = clip
    kept_texts = {}
    for text in texts:
        surviving = tuple(cid for cid in text.clip_ids if cid in kept_clips)
        if not surviving:
            dropped.append(
                DropRecord(
                    stage=stage,
                    reason="no_audible_item",
                    ref=text.text_id,
                    detail="every ground-truth clip is silent",
                )
            )
            continue
        kept_texts[text.text_id] = dataclasses.replace(text, clip_ids=surviving)
    if not kept_texts or not kept_clips:
        raise DegenerateInputError(
            f"benchmark degenerate after silence filtering: "
            f"{len(kept_texts)} queries, {len(kept_clips)} items"
        )
    return Corpus(clips=kept_clips, texts=kept_texts), dropped


def build_retrieval_benchmark(
    corpus: Corpus,
    text_kind: TextKind,
    relevance_kind: MatrixKind,
    name: str | None = None,
    grade_filter: Grade | None = None,
) -> RetrievalBenchmark:
    """Query set, item set, and relevance matrix with silent clips excluded."""
    sub, dropped = _audible_subset(corpus, text_kind, stage="retrieval")
    if relevance_kind == MatrixKind.CLASS_EQUALITY:
        rel = build_class_matrix(sub)
    else:
        rel = build_caption_matrix(sub, text_kind)
    spec = BenchmarkSpec(
        name=name or f"{text_kind.value}-{relevance_kind.value}",
        task=Task.RETRIEVAL,
        text_kind=text_kind,
        relevance_kind=relevance_kind,
        grade_filter=grade_filter,
    )
    query_texts = {t.text_id: t.text for t in sub.texts.values()}
    return RetrievalBenchmark(
        spec=spec,
        query_ids=rel.query_ids,
        item_ids=rel.item_ids,
        query_texts=query_texts,
        relevance=rel,
        dropped=tuple(dropped),
    )


def _mcq_sources(corpus: Corpus, kind: McqKind, candidates_per_item: int):
    """Manifest texts carrying an MCQ pair of the requested task, in order."""
    sources = []
    for text in corpus.texts.values():
        if text.mcq is None or text.mcq.task != kind.value:
            continue
        pair = text.mcq
        if len(pair.candidates) != candidates_per_item:
            raise IntegrityError(
                f"mcq pair {text.text_id!r} has {len(pair.candidates)} candidates, "
                f"expected {candidates_per_item}"
            )
        answer = pair.candidates[pair.answer_index]
        if answer not in text.clip_ids:
            raise IntegrityError(
                f"mcq pair {text.text_id!r}: answer {answer!r} is not a "
                f"ground-truth clip of the text"
            )
        sources.append((text, pair))
    if not sources:
        raise DegenerateInputError(f"no {kind.value} mcq pairs in corpus")
    return sources


def build_intra_mcq(
    corpus: Corpus,
    candidates_per_item: int = 5,
    strict: bool = True,
    name: str = "mcq-intra",
) -> McqBenchmark:
    """Same-video five-way items; silent answers always drop the item.

    Distractors cannot be replaced without leaving the source video, so in
    strict mode (default) a silent distractor also drops the item; lenient
    mode retains such items for sensitivity analysis.
    """
    items: list[MCQItem] = []
    dropped: list[DropRecord] = []
    query_texts: dict[str, str] = {}
    for text, pair in _mcq_sources(corpus, McqKind.INTRA, candidates_per_item):
        videos = {corpus.clips[c].source_video_id for c in pair.candidates}
        if len(videos) != 1:
            raise IntegrityError(
                f"intra mcq pair {text.text_id!r} spans videos {sorted(videos)}"
            )
        answer = pair.candidates[pair.answer_index]
        if corpus.clips[answer].is_silent:
            dropped.append(
                DropRecord(stage="intra", reason="silent_answer", ref=text.text_id, detail=answer)
            )
            continue
        silent_distractors = [
            c for i, c in enumerate(pair.candidates)
            if i != pair.answer_index and corpus.clips[c].is_silent
        ]
        if silent_distractors and strict:
            dropped.append(
                DropRecord(
                    stage="intra",
                    reason="silent_distractor",
                    ref=text.text_id,
                    detail=",".join(silent_distractors),
                )
            )
            continue
        items.append(
            MCQItem(
                query_text_id=text.text_id,
                candidates=pair.candidates,
                answer_index=pair.answer_index,
                kind=McqKind.INTRA,
            )
        )
        query_texts[text.text_id] = text.text
    spec = BenchmarkSpec(name=name, task=Task.MCQ, text_kind=TextKind.VISUAL_CAPTION)
    return McqBenchmark(
        spec=spec, items=tuple(items), query_texts=query_texts, dropped=tuple(dropped)
    )


def build_inter_mcq(
    corpus: Corpus,
    pool: tuple[str, ...] | None = None,
    seed: int = 0,
    candidates_per_item: int = 5,
    name: str = "mcq-inter",
) -> McqBenchmark:
    """Cross-video five-way items with seeded replacement of silent distractors.

    Replacements are drawn uniformly from the audible pool, excluding clips
    already in the item and clips from the answer clip's source video; a
    silent answer or an exhausted pool drops the item.
    """
    if pool is None:
        pool = corpus.audible_clip_ids()
    pool = tuple(pool)
    for cid in pool:
        if cid not in corpus.clips:
            raise IntegrityError(f"pool clip {cid!r} not in corpus")
    items: list[MCQItem] = []
    dropped: list[DropRecord] = []
    query_texts: dict[str, str] = {}
    for index, (text, pair) in enumerate(
        _mcq_sources(corpus, McqKind.INTER, candidates_per_item)
    ):
        answer = pair.candidates[pair.answer_index]
        answer_clip = corpus.clips[answer]
        if answer_clip.is_silent:
            dropped.append(
                DropRecord(stage="inter", reason="silent_answer", ref=text.text_id, detail=answer)
            )
            continue
        rng = random.Random(f"{seed}:{index}:{text.text_id}")
        candidates = list(pair.candidates)
        in_item = set(candidates)
        exhausted = False
        for pos, cid in enumerate(candidates):
            if pos == pair.answer_index or not corpus.clips[cid].is_silent:
                continue
            eligible = [
                p
                for p in pool
                if p not in in_item
                and not corpus.clips[p].is_silent
                and corpus.clips[p].source_video_id != answer_clip.source_video_id
            ]
            if not eligible:
                dropped.append(
                    DropRecord(
                        stage="inter",
                        reason="pool_exhausted",
                        ref=text.text_id,
                        detail=f"no audible replacement for {cid}",
                    )
                )
                exhausted = True
                break
            replacement = rng.choice(eligible)
            in_item.discard(cid)
            in_item.add(replacement)
            candidates[pos] = replacement
        if exhausted:
            continue
        if any(corpus.clips[c].is_silent for c in candidates):
            dropped.append(
                DropRecord(stage="inter", reason="silent_distractor", ref=text.text_id)
            )
            continue
        videos = {corpus.clips[c].source_video_id for c in candidates}
        if len(videos) < 2:
            raise IntegrityError(
                f"inter mcq pair {text.text_id!r} has all candidates from one video"
            )
        items.append(
            MCQItem(
                query_text_id=text.text_id,
                candidates=tuple(candidates),
                answer_index=pair.answer_index,
                kind=McqKind.INTER,
            )
        )
        query_texts[text.text_id] = text.text
    spec = BenchmarkSpec(name=name, task=Task.MCQ, text_kind=TextKind.VISUAL_CAPTION)
    return McqBenchmark(
        spec=spec, items=tuple(items), query_texts=query_texts, dropped=tuple(dropped)
    )


def _conversion_mapping(conversions) -> dict[str, str]:
    if isinstance(conversions, dict):
        return dict(conversions)
    mapping = {}
    for result in conversions:
        mapping[result.text_id] = result.audio_text
    return mapping


def attach_llm_texts(benchmark, conversions):
    """Swap every query text for its converted form; structure stays fixed.

    ``conversions`` is either a mapping text_id -> new text or an iterable of
    conversion results with ``text_id`` and ``audio_text`` attributes. Ids,
    relevance entries, and MCQ candidates are untouched, so swapping back with
    the stored originals restores the benchmark exactly.
    """
    mapping = _conversion_mapping(conversions)
    missing = [tid for tid in benchmark.query_texts if tid not in mapping]
    if missing:
        raise IntegrityError(
            f"{len(missing)} query texts lack conversions, e.g. {missing[:3]}"
        )
    new_texts = {tid: mapping[tid] for tid in benchmark.query_texts}
    return dataclasses.replace(benchmark, query_texts=new_texts)


def _meta_line(benchmark) -> dict:
    spec = benchmark.spec
    return {
        "record": "meta",
        "name": spec.name,
        "task": spec.task.value,
        "text_kind": spec.text_kind.value,
        "relevance_kind": spec.relevance_kind.value if spec.relevance_kind else None,
        "grade_filter": spec.grade_filter.value if spec.grade_filter else None,
    }


def save_benchmark(benchmark, path, relevance_path=None) -> None:
    """Line-delimited JSON with stable key order: meta line, then records."""
    lines = [json.dumps(_meta_line(benchmark), sort_keys=True)]
    if isinstance(benchmark, RetrievalBenchmark):
        for qid in benchmark.query_ids:
            lines.append(
                json.dumps(
                    {"record": "query", "text_id": qid, "text": benchmark.query_texts[qid]},
                    sort_keys=True,
                )
            )
        for iid in benchmark.item_ids:
            lines.append(json.dumps({"record": "item", "clip_id": iid}, sort_keys=True))
        if relevance_path is not None:
            save_relevance(benchmark.relevance, relevance_path)
    else:
        for item in benchmark.items:
            lines.append(
                json.dumps(
                    {
                        "record": "mcq",
                        "text_id": item.query_text_id,
                        "text": benchmark.query_texts[item.query_text_id],
                        "candidates": list(item.candidates),
                        "answer_index": item.answer_index,
                        "kind": item.kind.value,
                    },
                    sort_keys=True,
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_benchmark(path, relevance_path=None):
    """Rebuild a benchmark from its file; the drop log is not part of it."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty benchmark file")
    meta = json.loads(lines[0])
    if meta.get("record") != "meta":
        raise FormatError(f"{path}: first line is not the meta record")
    spec = BenchmarkSpec(
        name=meta["name"],
        task=Task(meta["task"]),
        text_kind=TextKind(meta["text_kind"]),
        relevance_kind=MatrixKind(meta["relevance_kind"]) if meta.get("relevance_kind") else None,
        grade_filter=Grade(meta["grade_filter"]) if meta.get("grade_filter") else None,
    )
    if spec.task == Task.RETRIEVAL:
        query_ids, item_ids, query_texts = [], [], {}
        for line in lines[1:]:
            rec = json.loads(line)
            if rec["record"] == "query":
                query_ids.append(rec["text_id"])
                query_texts[rec["text_id"]] = rec["text"]
            elif rec["record"] == "item":
                item_ids.append(rec["clip_id"])
            else:
                raise FormatError(f"{path}: unknown record {rec['record']!r}")
        if relevance_path is None:
            raise FormatError("retrieval benchmark needs its relevance matrix file")
        rel = load_relevance(
            relevance_path,
            query_ids=tuple(query_ids),
            item_ids=tuple(item_ids),
            kind=spec.relevance_kind,
        )
        return RetrievalBenchmark(
            spec=spec,
            query_ids=tuple(query_ids),
            item_ids=tuple(item_ids),
            query_texts=query_texts,
            relevance=rel,
        )
    items, query_texts = [], {}
    for line in lines[1:]:
        rec = json.loads(line)
        if rec["record"] != "mcq":
            raise FormatError(f"{path}: unknown record {rec['record']!r}")
        items.append(
            MCQItem(
                query_text_id=rec["text_id"],
                candidates=tuple(rec["candidates"]),
                answer_index=rec["answer_index"],
                kind=McqKind(rec["kind"]),
            )
        )
        query_texts[rec["text_id"]] = rec["text"]
    return McqBenchmark(spec=spec, items=tuple(items), query_texts=query_texts)


def save_drop_log(records, path) -> None:
    lines = [json.dumps(r.to_dict(), sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_drop_log(path) -> tuple[DropRecord, ...]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        rec = json.loads(line)
        records.append(DropRecord(**rec))
    return tuple(records)
