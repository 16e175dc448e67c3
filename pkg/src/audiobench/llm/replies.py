"""Parsing LLM replies into conversion results and relevancy grades.

Both parsers are total: every expected input gets a result, and anything the
reply fails to cover comes back with a Malformed status for the caller to
retry. Nothing here raises on bad model output.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass
from enum import Enum

from ..relevance import Grade


class ConversionStatus(str, Enum):
    OK = "ok"
    MALFORMED = "malformed"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class ConversionResult:
    index: int
    source_text: str
    audio_text: str
    status: ConversionStatus


class GradeStatus(str, Enum):
    OK = "ok"
    MALFORMED = "malformed"
    FAILED = "failed"


@dataclass(frozen=True)
class GradeResult:
    index: int
    source_text: str
    grade: Grade | None
    status: GradeStatus


_BRACKET_RE = re.compile(r"\[([^][]+)\]")
_ENTRY_RE = re.compile(r"\s*(\d+)\s*[.)]\s*(.*?)\s*$", re.DOTALL)


def _split_body(body: str, expected_source: str | None) -> str:
    """Audio description from one "source: audio" body.

    The known source text is stripped as a prefix when possible, so colons
    inside the source do not shift the split point.
    """
    if expected_source:
        lowered = body.lower()
        prefix = expected_source.lower()
        if lowered.startswith(prefix):
            rest = body[len(expected_source) :].lstrip()
            if rest.startswith(":"):
                return rest[1:].strip()
    parts = body.split(":", 1)
    if len(parts) == 2:
        return parts[1].strip()
    return ""


def parse_conversion_reply(reply: str, expected: list[str]) -> list[ConversionResult]:
    """One result per expected input, matched by the 1-based reply index."""
    chunks = _BRACKET_RE.findall(reply)
    if not chunks:
        chunks = [line for line in reply.splitlines() if line.strip()]
    found: dict[int, str] = {}
    for chunk in chunks:
        match = _ENTRY_RE.match(chunk)
        if not match:
            continue
        index = int(match.group(1))
        if index in found or not 1 <= index <= len(expected):
            continue
        found[index] = _split_body(match.group(2), expected[index - 1])
    results = []
    for i, source in enumerate(expected, 1):
        audio = found.get(i, "")
        if audio:
            results.append(
                ConversionResult(
                    index=i, source_text=source, audio_text=audio,
                    status=ConversionStatus.OK,
                )
            )
        else:
            results.append(
                ConversionResult(
                    index=i, source_text=source, audio_text="",
                    status=ConversionStatus.MALFORMED,
                )
            )
    return results


_GRADE_PAIR_RE = re.compile(
    r"[\"']([^\"']+)[\"']\s*:\s*[\"']?([A-Za-z]+)[\"']?"
)


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def _reply_pairs(reply: str) -> list[tuple[str, str]]:
    for loader in (json.loads, ast.literal_eval):
        try:
            data = loader(reply)
        except (ValueError, SyntaxError):
            continue
        if isinstance(data, dict):
            return [(str(k), str(v)) for k, v in data.items()]
    return [(k, v) for k, v in _GRADE_PAIR_RE.findall(reply)]


def parse_grading_reply(reply: str, expected: list[str]) -> list[GradeResult]:
    """Grades matched to expected texts exactly, then case/space-insensitively."""
    pairs = _reply_pairs(reply)
    exact = {}
    loose = {}
    for key, value in pairs:
        exact.setdefault(key, value)
        loose.setdefault(_normalize(key), value)
    vocabulary = {g.value: g for g in Grade}
    results = []
    for i, source in enumerate(expected, 1):
        raw = exact.get(source)
        if raw is None:
            raw = loose.get(_normalize(source))
        grade = vocabulary.get(raw.strip().lower()) if raw is not None else None
        if grade is not None:
            results.append(
                GradeResult(index=i, source_text=source, grade=grade, status=GradeStatus.OK)
            )
        else:
            results.append(
                GradeResult(
                    index=i, source_text=source, grade=None, status=GradeStatus.MALFORMED
                )
            )
    return results
