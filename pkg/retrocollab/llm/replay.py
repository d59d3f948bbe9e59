from __future__ import annotations

import json
import logging
import threading
from collections import deque
from pathlib import Path
from typing import Any, ClassVar

from langchain_core.language_models.chat_models import BaseChatModel
from langchain_core.messages import AIMessage, BaseMessage
from langchain_core.outputs import ChatGeneration, ChatResult
from pydantic import BaseModel, PrivateAttr

from .errors import BackendError, ReplayMismatchError
from .fingerprint import completion_digest, request_fingerprint

logger = logging.getLogger(__name__)


class RecordedCompletion(BaseModel):
    t: int
    k: int
    fingerprint: str
    digest: str
    text: str


def load_completions(path: Path | str, channel: str) -> list[RecordedCompletion]:
    """Completion events of one backend channel, in transcript order."""

    return [
        RecordedCompletion.model_validate(event)
        for event in _channel_events(path, channel)
        if event.get("event") == "completion"
    ]


def load_failure(path: Path | str, channel: str) -> str | None:
    """Detail of the backend error that ended the recorded episode on this channel, if any."""

    for event in _channel_events(path, channel):
        if event.get("event") == "backend_error":
            return event.get("detail", "")
    return None


def _channel_events(path: Path | str, channel: str) -> list[dict[str, Any]]:
    events: list[dict[str, Any]] = []
    with Path(path).open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ReplayMismatchError(f"{path}:{line_no} is not valid JSON") from exc
            if event.get("backend") == channel:
                events.append(event)
    return events


class ReplayChatModel(BaseChatModel):
    """Serves the completions of a recorded transcript, checking every request against it."""

    model_name: ClassVar[str] = "replay-chat-model"

    transcript_path: Path
    channel: str
    _queue: deque[RecordedCompletion] | None = PrivateAttr(default=None)
    _lock: threading.Lock = PrivateAttr(default_factory=threading.Lock)

    def _pending(self) -> deque[RecordedCompletion]:
        if self._queue is None:
            self._queue = deque(load_completions(self.transcript_path, self.channel))
        return self._queue

    def _generate(
        self,
        messages: list[BaseMessage],
        stop: list[str] | None = None,
        run_manager: Any | None = None,
        **kwargs: Any,
    ) -> ChatResult:
        fingerprint = request_fingerprint(messages)
        with self._lock:
            queue = self._pending()
            if not queue:
                failure = load_failure(self.transcript_path, self.channel)
                if failure is not None:
                    raise BackendError(failure)
                raise ReplayMismatchError(
                    f"{self.channel}: more requests than recorded completions"
                )
            recorded = queue.popleft()
        if recorded.fingerprint != fingerprint:
            raise ReplayMismatchError(
                f"{self.channel} t={recorded.t} k={recorded.k}: request differs from the recording"
            )
        if completion_digest(fingerprint, recorded.text) != recorded.digest:
            raise ReplayMismatchError(
                f"{self.channel} t={recorded.t} k={recorded.k}: recorded completion was edited"
            )
        logger.debug("replayed %s t=%s k=%s", self.channel, recorded.t, recorded.k)
        return ChatResult(generations=[ChatGeneration(message=AIMessage(content=recorded.text))])

    async def _agenerate(self, *args: Any, **kwargs: Any) -> ChatResult:  # pragma: no cover
        return self._generate(*args, **kwargs)

    @property
    def _llm_type(self) -> str:
        return self.model_name
