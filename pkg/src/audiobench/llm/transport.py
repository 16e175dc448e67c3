"""LLM transports: a chat-completions HTTP client and a replay stub.

The replay transport feeds canned replies and logs every call, so the whole
pipeline is testable without a live endpoint; the HTTP client speaks the
common chat JSON shape and reads its bearer token from the environment.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

import requests

from ..errors import FormatError, TransportError

TOKEN_ENV = "AUDIOBENCH_LLM_TOKEN"


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str = ""
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_batch: int = 20
    retry_limit: int = 2
    cache_dir: str = ".llm_cache"
    timeout_s: float = 60.0

    def __post_init__(self):
        if self.max_batch < 1:
            raise FormatError(f"max_batch must be >= 1, got {self.max_batch}")
        if self.temperature < 0:
            raise FormatError(f"temperature must be >= 0, got {self.temperature}")
        if self.retry_limit < 0:
            raise FormatError(f"retry_limit must be >= 0, got {self.retry_limit}")


@runtime_checkable
class Transport(Protocol):
    def complete(self, messages: list[dict], config: LlmConfig) -> str: ...


class HttpTransport:
    """POSTs chat messages to a completions-style JSON endpoint."""

    def __init__(self, session: requests.Session | None = None):
        self._session = session or requests.Session()

    def complete(self, messages: list[dict], config: LlmConfig) -> str:
        if not config.endpoint:
            raise TransportError("no LLM endpoint configured")
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {
            "model": config.model,
            "messages": messages,
            "temperature": config.temperature,
        }
        try:
            response = self._session.post(
                config.endpoint, json=payload, headers=headers, timeout=config.timeout_s
            )
        except requests.RequestException as exc:
            raise TransportError(f"LLM request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"LLM endpoint returned {response.status_code}: {response.text[:200]}"
            )
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed LLM response body: {exc}") from exc


@dataclass
class ReplayTransport:
    """Serves canned replies and counts calls.

    ``replies`` is either a sequence consumed in call order or a mapping from
    the final user message content to the reply, which is insensitive to call
    order (useful when retries reorder requests).
    """

    replies: Sequence[str] | Mapping[str, str]
    calls: list[list[dict]] = field(default_factory=list)
    _cursor: int = 0

    @property
    def n_calls(self) -> int:
        return len(self.calls)

    def complete(self, messages: list[dict], config: LlmConfig) -> str:
        self.calls.append(messages)
        if isinstance(self.replies, Mapping):
            key = messages[-1]["content"]
            if key not in self.replies:
                raise TransportError(f"replay transport has no reply for: {key[:80]!r}")
            return self.replies[key]
        if self._cursor >= len(self.replies):
            raise TransportError(
                f"replay transport exhausted after {self._cursor} replies"
            )
        reply = self.replies[self._cursor]
        self._cursor += 1
        return reply

    @classmethod
    def from_file(cls, path) -> "ReplayTransport":
        """Load replies from a JSON list of strings or JSONL of {"reply": ...}."""
        text = Path(path).read_text(encoding="utf-8")
        stripped = text.lstrip()
        if stripped.startswith("["):
            replies = json.loads(text)
            if not all(isinstance(r, str) for r in replies):
                raise FormatError(f"{path}: replay list must contain only strings")
            return cls(replies=replies)
        replies = []
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                replies.append(record["reply"])
            except (ValueError, KeyError, TypeError) as exc:
                raise FormatError(f"{path}:{n}: bad replay record: {exc}") from exc
        return cls(replies=replies)
