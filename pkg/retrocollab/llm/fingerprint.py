from __future__ import annotations

import hashlib
import json
from collections.abc import Sequence

from langchain_core.messages import AIMessage, BaseMessage, HumanMessage, SystemMessage

_ROLES: dict[type[BaseMessage], str] = {
    SystemMessage: "system",
    HumanMessage: "user",
    AIMessage: "assistant",
}


def message_role(message: BaseMessage) -> str:
    for cls, role in _ROLES.items():
        if isinstance(message, cls):
            return role
    return message.type


def plain_text_content(message: BaseMessage) -> str:
    content = getattr(message, "content", "")
    if isinstance(content, list):
        texts = []
        for part in content:
            if isinstance(part, dict) and "text" in part:
                texts.append(str(part["text"]))
            elif isinstance(part, str):
                texts.append(part)
        return "\n".join(texts)
    return str(content)


def message_payload(messages: Sequence[BaseMessage]) -> list[dict[str, str]]:
    return [
        {"role": message_role(message), "content": plain_text_content(message)}
        for message in messages
    ]


def request_fingerprint(messages: Sequence[BaseMessage]) -> str:
    """SHA-256 over the canonical JSON list of ``{role, content}``."""

    canonical = json.dumps(
        message_payload(messages), ensure_ascii=False, separators=(",", ":"), sort_keys=True
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def completion_digest(fingerprint: str, completion: str) -> str:
    return hashlib.sha256(f"{fingerprint}\n{completion}".encode()).hexdigest()
