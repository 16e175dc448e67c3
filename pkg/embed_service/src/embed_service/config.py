"""Service configuration: which backends are served and batch limits."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .backends import BUILTIN_BACKENDS


@dataclass(frozen=True)
class ServiceConfig:
    models: tuple[str, ...] = tuple(BUILTIN_BACKENDS)
    max_batch: int = 256

    def __post_init__(self):
        if not self.models:
            raise ValueError("config serves no models")
        unknown = [m for m in self.models if m not in BUILTIN_BACKENDS]
        if unknown:
            raise ValueError(f"unknown model tags in config: {unknown}")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            models=tuple(raw.get("models", tuple(BUILTIN_BACKENDS))),
            max_batch=int(raw.get("max_batch", 256)),
        )

    def backends(self) -> dict:
        return {name: BUILTIN_BACKENDS[name] for name in self.models}
