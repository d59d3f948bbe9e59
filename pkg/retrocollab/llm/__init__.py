from .backends import build_chat_model, complete
from .errors import (
    BackendError,
    LLMError,
    MalformedResponseError,
    PromptTooLongError,
    ReplayMismatchError,
    ScriptExhaustedError,
)
from .fingerprint import completion_digest, message_payload, request_fingerprint
from .local import LocalCriticModel
from .replay import ReplayChatModel, load_completions, load_failure
from .schemas import BackendConfig, BackendScope, ScriptEntry, ScriptFile
from .scripted import ScriptedChatModel, load_script

__all__ = [
    "BackendConfig",
    "BackendError",
    "BackendScope",
    "LLMError",
    "LocalCriticModel",
    "MalformedResponseError",
    "PromptTooLongError",
    "ReplayChatModel",
    "ReplayMismatchError",
    "ScriptEntry",
    "ScriptExhaustedError",
    "ScriptFile",
    "ScriptedChatModel",
    "build_chat_model",
    "complete",
    "completion_digest",
    "load_completions",
    "load_failure",
    "load_script",
    "message_payload",
    "request_fingerprint",
]
