"""LLM bridge: prompt assembly, reply parsing, transports, caching."""

from .cache import ReplyCache
from .pipeline import convert_batch, grade_batch
from .prompts import (
    PLACEHOLDER,
    FewShotPair,
    PromptBundle,
    build_conversion_prompts,
    build_grading_prompt,
    conversion_examples_prompt,
    conversion_request_template,
    conversion_task_prompt,
    few_shot_pairs,
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
from .transport import HttpTransport, LlmConfig, ReplayTransport, Transport

__all__ = [
    "PLACEHOLDER",
    "ConversionResult",
    "ConversionStatus",
    "FewShotPair",
    "GradeResult",
    "GradeStatus",
    "HttpTransport",
    "LlmConfig",
    "PromptBundle",
    "ReplayTransport",
    "ReplyCache",
    "Transport",
    "build_conversion_prompts",
    "build_grading_prompt",
    "conversion_examples_prompt",
    "conversion_request_template",
    "conversion_task_prompt",
    "convert_batch",
    "few_shot_pairs",
    "grade_batch",
    "grading_task_prompt",
    "parse_conversion_reply",
    "parse_grading_reply",
    "prompt_hash",
    "sanitize_input",
]
