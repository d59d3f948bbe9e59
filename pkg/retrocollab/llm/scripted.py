from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Any, ClassVar

from langchain_core.language_models.chat_models import BaseChatModel
from langchain_core.messages import AIMessage, BaseMessage
from langchain_core.outputs import ChatGeneration, ChatResult
from pydantic import PrivateAttr

from .errors import ScriptExhaustedError
from .fingerprint import plain_text_content
from .schemas import ScriptEntry, ScriptFile

logger = logging.getLogger(__name__)


def load_script(path: Path | str) -> list[ScriptEntry]:
    return ScriptFile.model_validate_json(Path(path).read_text(encoding="utf-8")).entries


class ScriptedChatModel(BaseChatModel):
    """Deterministic chat model that serves queued responses in order.

    An entry with ``match`` is only served when the prompt contains that substring;
    the first remaining entry that fits is consumed.
    """

    model_name: ClassVar[str] = "scripted-chat-model"

    entries: list[ScriptEntry]
    _served: set[int] = PrivateAttr(default_factory=set)
    _lock: threading.Lock = PrivateAttr(default_factory=threading.Lock)

    @classmethod
    def from_file(cls, path: Path | str) -> ScriptedChatModel:
        return cls(entries=load_script(path))

    @classmethod
    def from_responses(cls, responses: list[str]) -> ScriptedChatModel:
        return cls(entries=[ScriptEntry(response=text) for text in responses])

    @property
    def remaining(self) -> int:
        return len(self.entries) - len(self._served)

    def _generate(
        self,
        messages: list[BaseMessage],
        stop: list[str] | None = None,
        run_manager: Any | None = None,
        **kwargs: Any,
    ) -> ChatResult:
        prompt = "\n".join(plain_text_content(message) for message in messages)
        with self._lock:
            for index, entry in enumerate(self.entries):
                if index in self._served:
                    continue
                if entry.match is None or entry.match in prompt:
                    self._served.add(index)
                    response = entry.response
                    break
            else:
                raise ScriptExhaustedError(
                    f"no scripted response left ({len(self.entries)} entries served or unmatched)"
                )
        logger.debug("scripted response #%d served", index)
        return ChatResult(generations=[ChatGeneration(message=AIMessage(content=response))])

    async def _agenerate(self, *args: Any, **kwargs: Any) -> ChatResult:  # pragma: no cover
        return self._generate(*args, **kwargs)

    @property
    def _llm_type(self) -> str:
        return self.model_name
