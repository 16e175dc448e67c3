"""Batch conversion and grading with caching, retries, and fallback.

Both entry points are total over their inputs: conversion always terminates
in {Ok, Fallback} per item (Fallback passes the source text through), grading
in {Ok, Failed}. Cached replies short-circuit transport entirely, so a warm
second run makes zero calls and reproduces its outputs byte-identically.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import TransportError
from .cache import ReplyCache
from .prompts import (
    PromptBundle,
    build_grading_prompt,
    grading_task_prompt,
    prompt_hash,
    sanitize_input,
)
from .replies import (
    ConversionResult,
    ConversionStatus,
    GradeResult,
    GradeStatus,
    parse_conversion_reply,
    parse_grading_reply,
)
from ..relevance import Grade
from .transport import LlmConfig, Transport


def _default_cache(config: LlmConfig) -> ReplyCache:
    return ReplyCache(Path(config.cache_dir) / "replies.jsonl")


def _call(
    transport: Transport,
    messages: list[dict],
    config: LlmConfig,
    unresolved: list[str],
) -> str:
    last_error = None
    for _ in range(config.retry_limit + 1):
        try:
            return transport.complete(messages, config)
        except TransportError as exc:
            last_error = exc
    raise TransportError(
        f"transport failed after {config.retry_limit + 1} attempts: {last_error}",
        unconverted=tuple(unresolved),
    )


def convert_batch(
    inputs: list[str],
    config: LlmConfig,
    transport: Transport,
    bundle: PromptBundle | None = None,
    cache: ReplyCache | None = None,
) -> list[ConversionResult]:
    """Audio descriptions for every input, in input order.

    Cached results are served without transport calls; fresh replies are
    parsed per index, malformed items retried as singleton batches up to the
    retry limit, and anything still unparsed falls back to its source text.
    All terminal results, fallbacks included, are persisted to the cache.
    """
    if not inputs:
        return []
    bundle = bundle or PromptBundle.default()
    cache = cache if cache is not None else _default_cache(config)
    phash = bundle.hash()
    sanitized = [sanitize_input(text) for text in inputs]
    results: list[ConversionResult | None] = [None] * len(inputs)

    for i, original in enumerate(inputs):
        record = cache.get("convert", config.model, phash, original)
        if record is not None:
            results[i] = ConversionResult(
                index=i + 1,
                source_text=original,
                audio_text=record["output"],
                status=ConversionStatus(record["status"]),
            )

    def unresolved_texts() -> list[str]:
        return [inputs[i] for i in range(len(inputs)) if results[i] is None]

    def finalize(i: int, audio_text: str, status: ConversionStatus) -> None:
        results[i] = ConversionResult(
            index=i + 1, source_text=inputs[i], audio_text=audio_text, status=status
        )
        cache.put("convert", config.model, phash, inputs[i], status.value, audio_text)

    pending = [i for i in range(len(inputs)) if results[i] is None]
    for start in range(0, len(pending), config.max_batch):
        chunk = pending[start : start + config.max_batch]
        chunk_texts = [sanitized[i] for i in chunk]
        reply = _call(transport, bundle.messages(chunk_texts), config, unresolved_texts())
        for position, parsed in zip(chunk, parse_conversion_reply(reply, chunk_texts)):
            if parsed.status == ConversionStatus.OK:
                finalize(position, parsed.audio_text, ConversionStatus.OK)

    for i in [k for k in pending if results[k] is None]:
        recovered = False
        for _ in range(config.retry_limit):
            reply = _call(
                transport, bundle.messages([sanitized[i]]), config, unresolved_texts()
            )
            parsed = parse_conversion_reply(reply, [sanitized[i]])[0]
            if parsed.status == ConversionStatus.OK:
                finalize(i, parsed.audio_text, ConversionStatus.OK)
                recovered = True
                break
        if not recovered:
            finalize(i, inputs[i], ConversionStatus.FALLBACK)

    return results


def grade_batch(
    inputs: list[str],
    config: LlmConfig,
    transport: Transport,
    cache: ReplyCache | None = None,
) -> list[GradeResult]:
    """Relevancy grades for every input, in input order.

    Items the model never grades validly end as Failed (grade None) and are
    not cached, so a later run retries them.
    """
    if not inputs:
        return []
    cache = cache if cache is not None else _default_cache(config)
    phash = prompt_hash(grading_task_prompt())
    results: list[GradeResult | None] = [None] * len(inputs)

    for i, original in enumerate(inputs):
        record = cache.get("grade", config.model, phash, original)
        if record is not None:
            results[i] = GradeResult(
                index=i + 1,
                source_text=original,
                grade=Grade(record["output"]),
                status=GradeStatus.OK,
            )

    def unresolved_texts() -> list[str]:
        return [inputs[i] for i in range(len(inputs)) if results[i] is None]

    def finalize_ok(i: int, grade: Grade) -> None:
        results[i] = GradeResult(
            index=i + 1, source_text=inputs[i], grade=grade, status=GradeStatus.OK
        )
        cache.put("grade", config.model, phash, inputs[i], "ok", grade.value)

    pending = [i for i in range(len(inputs)) if results[i] is None]
    for start in range(0, len(pending), config.max_batch):
        chunk = pending[start : start + config.max_batch]
        chunk_texts = [inputs[i] for i in chunk]
        reply = _call(transport, build_grading_prompt(chunk_texts), config, unresolved_texts())
        for position, parsed in zip(chunk, parse_grading_reply(reply, chunk_texts)):
            if parsed.status == GradeStatus.OK:
                finalize_ok(position, parsed.grade)

    for i in [k for k in pending if results[k] is None]:
        recovered = False
        for _ in range(config.retry_limit):
            reply = _call(
                transport, build_grading_prompt([inputs[i]]), config, unresolved_texts()
            )
            parsed = parse_grading_reply(reply, [inputs[i]])[0]
            if parsed.status == GradeStatus.OK:
                finalize_ok(i, parsed.grade)
                recovered = True
                break
        if not recovered:
            results[i] = GradeResult(
                index=i + 1, source_text=inputs[i], grade=None, status=GradeStatus.FAILED
            )

    return results
