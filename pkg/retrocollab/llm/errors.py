from __future__ import annotations


class LLMError(Exception):
    """Base class for chat backend failures."""


class BackendError(LLMError):
    """The backend could not produce a completion; ends the episode as ``backend_error``."""


class MalformedResponseError(BackendError):
    pass


class ScriptExhaustedError(BackendError):
    pass


class PromptTooLongError(LLMError, ValueError):
    pass


class ReplayMismatchError(LLMError):
    """A replayed request or completion differs from the recorded transcript."""
