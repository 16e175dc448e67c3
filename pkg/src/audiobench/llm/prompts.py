"""Prompt fixtures and message assembly for conversion and grading.

The three conversion prompts and the grading prompt ship as plain-text
resources under ``prompts/``. They are functional data: the conversion reply
format and the few-shot pairing behaviour depend on their exact wording, so
the loader treats them as byte-frozen (one trailing newline excepted) and
exposes their hashes for cache keying and golden tests.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..errors import FormatError
from .transport import LlmConfig

PLACEHOLDER = "<Add the list of visual labels separated by ; here>"

_PAIR_RE = re.compile(r"\('([^']*)',\s*'([^']*)'\)")


@lru_cache(maxsize=None)
def _fixture(name: str) -> str:
    text = (resources.files("audiobench.llm") / "prompts" / name).read_text(
        encoding="utf-8"
    )
    # fixtures are stored with one cosmetic trailing newline
    return text[:-1] if text.endswith("\n") else text


def conversion_task_prompt() -> str:
    return _fixture("convert_task.txt")


def conversion_examples_prompt() -> str:
    return _fixture("convert_examples.txt")


def conversion_request_template() -> str:
    return _fixture("convert_request.txt")


def grading_task_prompt() -> str:
    return _fixture("grade_task.txt")


def prompt_hash(*texts: str) -> str:
    digest = hashlib.sha256("\x00".join(texts).encode("utf-8"))
    return digest.hexdigest()


@dataclass(frozen=True)
class FewShotPair:
    visual: str
    audio: str

    def __post_init__(self):
        if not self.visual or not self.audio:
            raise FormatError("few-shot pair with an empty side")


def few_shot_pairs() -> tuple[FewShotPair, ...]:
    """The example pairs embedded in the conversion examples prompt."""
    pairs = tuple(
        FewShotPair(visual=v, audio=a)
        for v, a in _PAIR_RE.findall(conversion_examples_prompt())
    )
    if not pairs:
        raise FormatError("conversion examples prompt contains no pairs")
    return pairs


def sanitize_input(text: str) -> str:
    """Collapse whitespace and remove the list delimiter from one input.

    Semicolons separate enumerated inputs inside the request prompt, so they
    are rewritten to commas; an input that is empty after cleanup cannot be
    enumerated and raises a format error.
    """
    clean = " ".join(text.replace(";", ",").split())
    if not clean:
        raise FormatError(f"input empty after sanitization: {text!r}")
    return clean


@dataclass(frozen=True)
class PromptBundle:
    """The three conversion prompts, overridable as a unit."""

    system_prompt: str
    fewshot_prompt: str
    batch_prompt_template: str

    def __post_init__(self):
        if PLACEHOLDER not in self.batch_prompt_template:
            raise FormatError(
                f"batch prompt template lacks the placeholder {PLACEHOLDER!r}"
            )

    @classmethod
    def default(cls) -> "PromptBundle":
        return cls(
            system_prompt=conversion_task_prompt(),
            fewshot_prompt=conversion_examples_prompt(),
            batch_prompt_template=conversion_request_template(),
        )

    def hash(self) -> str:
        return prompt_hash(
            self.system_prompt, self.fewshot_prompt, self.batch_prompt_template
        )

    def request_message(self, inputs: list[str]) -> str:
        enumerated = "; ".join(f"{i}. {text}" for i, text in enumerate(inputs, 1))
        return self.batch_prompt_template.replace(PLACEHOLDER, enumerated)

    def messages(self, inputs: list[str]) -> list[dict]:
        return [
            {"role": "system", "content": self.system_prompt},
            {"role": "user", "content": self.fewshot_prompt},
            {"role": "user", "content": self.request_message(inputs)},
        ]


def build_conversion_prompts(
    inputs: list[str], config: LlmConfig, bundle: PromptBundle | None = None
) -> list[list[dict]]:
    """Message batches of at most ``config.max_batch`` inputs, order preserved."""
    if not inputs:
        raise FormatError("no inputs to convert")
    bundle = bundle or PromptBundle.default()
    sanitized = [sanitize_input(t) for t in inputs]
    batches = []
    for start in range(0, len(sanitized), config.max_batch):
        batches.append(bundle.messages(sanitized[start : start + config.max_batch]))
    return batches


def build_grading_prompt(
    inputs: list[str], task_prompt: str | None = None
) -> list[dict]:
    """Grading messages: the fixed task prompt plus the inputs as a list."""
    if not inputs:
        raise FormatError("no inputs to grade")
    for text in inputs:
        if not text.strip():
            raise FormatError("blank grading input")
    return [
        {"role": "system", "content": task_prompt or grading_task_prompt()},
        {"role": "user", "content": json.dumps(list(inputs))},
    ]
