"""Graded relevance: caption parsing into verb/noun sets and relevance matrices.

Two matrix flavours exist. CaptionOverlap grades every (query text, clip)
pair in [0, 1] by how many verbs and nouns the two captions share, so several
clips can be partially correct for one query. ClassEquality is the binary
variant for class-labelled corpora: 1 iff the clip belongs to the label's
class. Exact-match pairs always score 1.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .corpus import Corpus, Description, TextKind
from .errors import IntegrityError, ParseError


def _load_stopwords() -> frozenset[str]:
    text = resources.files("audiobench").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


STOPWORDS = _load_stopwords()

_PUNCT = string.punctuation


class MatrixKind(str, Enum):
    CAPTION_OVERLAP = "caption_overlap"
    CLASS_EQUALITY = "class_equality"


class Grade(str, Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"


@dataclass(frozen=True)
class RelevancyGrade:
    text_id: str
    grade: Grade


@dataclass(frozen=True)
class ParsedCaption:
    text_id: str
    verbs: frozenset[str]
    nouns: frozenset[str]


def _tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(_PUNCT)
        if token:
            tokens.append(token)
    return tokens


def parse_caption(
    text: str,
    verbs: set[str] | frozenset[str] | None = None,
    nouns: set[str] | frozenset[str] | None = None,
    text_id: str = "",
) -> ParsedCaption:
    """Split a caption into verb and noun token sets.

    Dataset-provided annotations win verbatim; otherwise the first token is
    the verb and the remaining non-stopword tokens are nouns, which matches
    the short verb-plus-nouns caption style these corpora use.
    """
    if not text.strip():
        raise ParseError(f"empty caption for text {text_id!r}")
    if verbs is not None or nouns is not None:
        parsed = ParsedCaption(
            text_id=text_id,
            verbs=frozenset(w.lower() for w in (verbs or ())),
            nouns=frozenset(w.lower() for w in (nouns or ())),
        )
        if not parsed.verbs and not parsed.nouns:
            raise ParseError(f"annotation for text {text_id!r} has empty verb and noun sets")
        return parsed
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError(f"caption for text {text_id!r} has no tokens after cleanup")
    return ParsedCaption(
        text_id=text_id,
        verbs=frozenset((tokens[0],)),
        nouns=frozenset(t for t in tokens[1:] if t not in STOPWORDS),
    )


def parse_description(desc: Description) -> ParsedCaption:
    return parse_caption(desc.text, verbs=desc.verbs, nouns=desc.nouns, text_id=desc.text_id)


def _iou(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def caption_relevance(a: ParsedCaption, b: ParsedCaption) -> float:
    """Mean of verb-set and noun-set IoU; symmetric, 1.0 for identical captions."""
    return 0.5 * (_iou(a.verbs, b.verbs) + _iou(a.nouns, b.nouns))


@dataclass(frozen=True)
class RelevanceMatrix:
    """Sparse query-text x item grades; absent entries mean relevance 0."""

    query_ids: tuple[str, ...]
    item_ids: tuple[str, ...]
    entries: dict[tuple[str, str], float]
    kind: MatrixKind

    def __post_init__(self):
        qset, iset = set(self.query_ids), set(self.item_ids)
        for (q, i), v in self.entries.items():
            if not 0.0 < v <= 1.0:
                raise IntegrityError(f"relevance ({q!r}, {i!r}) = {v} outside (0, 1]")
            if q not in qset or i not in iset:
                raise IntegrityError(f"relevance entry ({q!r}, {i!r}) outside the declared axes")

    def value(self, query_id: str, item_id: str) -> float:
        return self.entries.get((query_id, item_id), 0.0)

    def transposed(self) -> "RelevanceMatrix":
        return RelevanceMatrix(
            query_ids=self.item_ids,
            item_ids=self.query_ids,
            entries={(i, q): v for (q, i), v in self.entries.items()},
            kind=self.kind,
        )

    def restrict(self, query_ids, item_ids) -> "RelevanceMatrix":
        """Sub-matrix over the given axes; surviving entries keep their values."""
        qset, iset = set(query_ids), set(item_ids)
        missing = (qset - set(self.query_ids)) | (iset - set(self.item_ids))
        if missing:
            raise IntegrityError(f"restrict: ids not in matrix: {sorted(missing)[:5]}")
        return RelevanceMatrix(
            query_ids=tuple(query_ids),
            item_ids=tuple(item_ids),
            entries={
                (q, i): v for (q, i), v in self.entries.items() if q in qset and i in iset
            },
            kind=self.kind,
        )


def _caption_of_clip(corpus: Corpus, kind: TextKind) -> dict[str, Description]:
    by_clip: dict[str, Description] = {}
    for text in corpus.texts_of_kind(kind):
        for clip_id in text.clip_ids:
            if clip_id in by_clip and by_clip[clip_id].text_id != text.text_id:
                raise IntegrityError(
                    f"clip {clip_id!r} has more than one {kind.value} description"
                )
            by_clip[clip_id] = text
    return by_clip


def build_caption_matrix(
    corpus: Corpus, kind: TextKind = TextKind.VISUAL_CAPTION
) -> RelevanceMatrix:
    """Caption-overlap grades for every text of ``kind`` against every captioned clip.

    The item axis is the clips carrying a caption of that kind, in corpus
    order. Ground-truth pairs (a query against its own clips) are pinned to
    exactly 1.0. The same matrix is reused unchanged when query texts are
    later swapped for converted descriptions.
    """
    queries = corpus.texts_of_kind(kind)
    if not queries:
        raise IntegrityError(f"corpus has no texts of kind {kind.value}")
    caption_of = _caption_of_clip(corpus, kind)
    item_ids = tuple(c for c in corpus.clips if c in caption_of)

    parsed = {t.text_id: parse_description(t) for t in queries}
    # identical caption signatures share one relevance computation
    signature = {
        tid: (p.verbs, p.nouns) for tid, p in parsed.items()
    }
    unique_sigs = sorted({sig for sig in signature.values()}, key=lambda s: (sorted(s[0]), sorted(s[1])))
    sig_index = {sig: k for k, sig in enumerate(unique_sigs)}
    pair_rel: dict[tuple[int, int], float] = {}
    for a_idx, (av, an) in enumerate(unique_sigs):
        pa = ParsedCaption("", av, an)
        for b_idx, (bv, bn) in enumerate(unique_sigs):
            if b_idx < a_idx:
                continue
            r = caption_relevance(pa, ParsedCaption("", bv, bn))
            pair_rel[(a_idx, b_idx)] = r
            pair_rel[(b_idx, a_idx)] = r

    entries: dict[tuple[str, str], float] = {}
    for q in queries:
        q_idx = sig_index[signature[q.text_id]]
        for clip_id in item_ids:
            c_idx = sig_index[signature[caption_of[clip_id].text_id]]
            r = pair_rel[(q_idx, c_idx)]
            if r > 0.0:
                entries[(q.text_id, clip_id)] = r
        for clip_id in q.clip_ids:
            if clip_id in caption_of:
                entries[(q.text_id, clip_id)] = 1.0
    return RelevanceMatrix(
        query_ids=tuple(t.text_id for t in queries),
        item_ids=item_ids,
        entries=entries,
        kind=MatrixKind.CAPTION_OVERLAP,
    )


def build_class_matrix(corpus: Corpus) -> RelevanceMatrix:
    """Binary relevance for class-labelled corpora: 1 iff clip class == label.

    Every text must be an audio class label; a clip's class is the label that
    lists it. Clips claimed by no label, or by more than one, are integrity
    errors.
    """
    labels = corpus.texts_of_kind(TextKind.AUDIO_CLASS_LABEL)
    if not labels:
        raise IntegrityError("corpus has no audio_class_label texts")
    non_labels = [t.text_id for t in corpus.texts.values() if t.kind != TextKind.AUDIO_CLASS_LABEL]
    if non_labels:
        raise IntegrityError(
            f"class matrix requires only audio_class_label texts; found {non_labels[:5]}"
        )
    class_of: dict[str, str] = {}
    for label in labels:
        for clip_id in label.clip_ids:
            if clip_id in class_of:
                raise IntegrityError(f"clip {clip_id!r} labelled with more than one class")
            class_of[clip_id] = label.text_id
    unlabeled = [c for c in corpus.clips if c not in class_of]
    if unlabeled:
        raise IntegrityError(f"clips without a class label: {unlabeled[:5]}")

    item_ids = tuple(corpus.clips)
    entries = {
        (class_of[clip_id], clip_id): 1.0 for clip_id in item_ids
    }
    return RelevanceMatrix(
        query_ids=tuple(t.text_id for t in labels),
        item_ids=item_ids,
        entries=entries,
        kind=MatrixKind.CLASS_EQUALITY,
    )


def split_by_grade(corpus: Corpus, grades: list[RelevancyGrade]) -> dict[Grade, Corpus]:
    """Partition texts into low/moderate/high sub-corpora.

    Texts are partitioned exactly; each sub-corpus keeps the clips its texts
    reference (a clip shared by texts of different grades appears in both).
    Matrices for the subsets come from RelevanceMatrix.restrict.
    """
    grade_of: dict[str, Grade] = {}
    for g in grades:
        if g.text_id in grade_of:
            raise IntegrityError(f"text {g.text_id!r} graded more than once")
        grade_of[g.text_id] = g.grade
    ungraded = [t for t in corpus.texts if t not in grade_of]
    if ungraded:
        raise IntegrityError(f"ungraded texts: {ungraded[:5]}")

    out: dict[Grade, Corpus] = {}
    for grade in Grade:
        texts = {tid: t for tid, t in corpus.texts.items() if grade_of[tid] == grade}
        clip_ids: set[str] = set()
        for t in texts.values():
            clip_ids.update(t.clip_ids)
            if t.mcq is not None:
                clip_ids.update(t.mcq.candidates)
        clips = {cid: c for cid, c in corpus.clips.items() if cid in clip_ids}
        out[grade] = Corpus(clips=clips, texts=texts)
    return out


def save_relevance(matrix: RelevanceMatrix, path: str | Path) -> None:
    """Sparse triplet file, one JSON record per positive entry, in axis order."""
    q_order = {q: k for k, q in enumerate(matrix.query_ids)}
    i_order = {i: k for k, i in enumerate(matrix.item_ids)}
    triplets = sorted(matrix.entries.items(), key=lambda kv: (q_order[kv[0][0]], i_order[kv[0][1]]))
    with open(path, "w", encoding="utf-8") as fh:
        for (q, i), v in triplets:
            fh.write(
                json.dumps({"query_id": q, "item_id": i, "value": v}, sort_keys=True, ensure_ascii=False)
                + "\n"
            )


def load_relevance(
    path: str | Path,
    query_ids,
    item_ids,
    kind: MatrixKind,
) -> RelevanceMatrix:
    entries: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            entries[(record["query_id"], record["item_id"])] = float(record["value"])
    return RelevanceMatrix(
        query_ids=tuple(query_ids), item_ids=tuple(item_ids), entries=entries, kind=kind
    )


def save_grades(grades: list[RelevancyGrade], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in grades:
            fh.write(f"{g.text_id}\t{g.grade.value}\n")


def load_grades(path: str | Path) -> list[RelevancyGrade]:
    grades = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected two tab-separated columns")
            grades.append(RelevancyGrade(text_id=parts[0], grade=Grade(parts[1])))
    return grades
