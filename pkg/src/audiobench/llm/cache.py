"""Append-only reply cache, one JSON line per (kind, model, prompt, input).

Appending without rewriting means a crash mid-run loses at most the final
partial line, which the loader skips; later records for the same key win so
a deliberate re-grade can supersede an old entry.
"""

from __future__ import annotations

import json
from pathlib import Path


class ReplyCache:
    def __init__(self, path):
        self.path = Path(path)
        self._entries: dict[tuple, dict] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                try:
                    record = json.loads(line)
                    key = self._key_of(record)
                except (ValueError, KeyError, TypeError):
                    continue
                self._entries[key] = record

    @staticmethod
    def _key_of(record: dict) -> tuple:
        return (record["kind"], record["model"], record["prompt_hash"], record["input"])

    def get(self, kind: str, model: str, prompt_hash: str, input_text: str) -> dict | None:
        return self._entries.get((kind, model, prompt_hash, input_text))

    def put(
        self,
        kind: str,
        model: str,
        prompt_hash: str,
        input_text: str,
        status: str,
        output: str,
    ) -> None:
        record = {
            "kind": kind,
            "model": model,
            "prompt_hash": prompt_hash,
            "input": input_text,
            "status": status,
            "output": output,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
        self._entries[self._key_of(record)] = record

    def __len__(self) -> int:
        return len(self._entries)
