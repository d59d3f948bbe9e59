"""JSON Lines episode transcripts.

Every event carries ``episode``, ``t`` (environment step), ``k`` (model request index inside
the step) and ``event``, followed by event-specific fields. Nothing time-dependent is written,
so two runs with the same scripted backends produce identical files.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from pathlib import Path
from typing import IO, Any

logger = logging.getLogger(__name__)

__all__ = ["TranscriptRecorder", "read_events"]


class TranscriptRecorder:
    def __init__(self, path: Path | str, episode_id: str) -> None:
        self.path = Path(path)
        self.episode_id = episode_id
        self.t = 0
        self.k = 0
        self._handle: IO[str] | None = None

    def __enter__(self) -> TranscriptRecorder:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", encoding="utf-8", newline="\n")
        return self

    def __exit__(self, *exc_info: object) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def start_step(self, t: int) -> None:
        if t != self.t:
            self.t = t
            self.k = 0

    def next_request(self) -> int:
        """Index for the next model request of the current step."""

        k = self.k
        self.k += 1
        return k

    def emit(self, event: str, *, k: int | None = None, **fields: Any) -> dict[str, Any]:
        if self._handle is None:
            raise RuntimeError("the transcript recorder is not open")
        record: dict[str, Any] = {
            "episode": self.episode_id,
            "t": self.t,
            "k": self.k if k is None else k,
            "event": event,
        }
        record.update(fields)
        self._handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._handle.flush()
        return record


def read_events(path: Path | str) -> Iterator[dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield json.loads(line)
