from __future__ import annotations

import logging
import os
from collections.abc import Sequence

import httpx
import openai
from langchain.chat_models import init_chat_model
from langchain_core.language_models.chat_models import BaseChatModel
from langchain_core.messages import BaseMessage, HumanMessage

from .errors import BackendError, LLMError, MalformedResponseError, PromptTooLongError
from .fingerprint import plain_text_content
from .local import LocalCriticModel
from .replay import ReplayChatModel
from .schemas import BackendConfig, BackendScope
from .scripted import ScriptedChatModel

logger = logging.getLogger(__name__)

__all__ = ["build_chat_model", "complete"]


def build_chat_model(
    config: BackendConfig,
    *,
    http_client: httpx.Client | None = None,
    episode: BackendScope | None = None,
) -> BaseChatModel:
    """Instantiate the chat model behind ``config`` for one episode slot."""

    scope = episode or BackendScope(channel="llm1")
    if config.kind == "http":
        api_key = os.environ.get(config.api_key_env) or "EMPTY"
        return init_chat_model(
            model=config.model_name,
            model_provider="openai",
            base_url=config.base_url,
            api_key=api_key,
            temperature=config.temperature,
            max_tokens=config.max_tokens,
            timeout=config.timeout,
            max_retries=config.max_retries,
            http_client=http_client,
        )
    if config.kind == "scripted":
        return ScriptedChatModel.from_file(config.script_path)
    if config.kind == "replay":
        return ReplayChatModel(transcript_path=config.replay_path, channel=scope.channel)
    if config.kind == "oracle":
        if scope.channel == "llm2":
            return LocalCriticModel()
        if scope.task_id is None or scope.seed is None:
            raise ValueError("the oracle backend needs the episode's task and seed")
        from retrocollab.bench.oracle import oracle_script

        return ScriptedChatModel(entries=oracle_script(scope.task_id, scope.seed))
    raise ValueError(f"unknown backend kind {config.kind!r}")


def complete(
    model: BaseChatModel,
    messages: Sequence[BaseMessage],
    *,
    max_prompt_chars: int | None = None,
) -> str:
    """Request one completion and return its text."""

    if not messages or not isinstance(messages[-1], HumanMessage):
        raise ValueError("a chat request must end with a user message")
    size = sum(len(plain_text_content(message)) for message in messages)
    if max_prompt_chars is not None and size > max_prompt_chars:
        raise PromptTooLongError(f"prompt has {size} characters, the limit is {max_prompt_chars}")
    try:
        response = model.invoke(list(messages))
    except LLMError:
        raise
    except (openai.APIError, httpx.HTTPError) as exc:
        raise BackendError(f"{type(exc).__name__}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponseError(f"unreadable completion: {exc}") from exc
    answer = plain_text_content(response)
    if not answer.strip():
        raise MalformedResponseError("the completion is empty")
    preview = answer if len(answer) < 500 else f"{answer[:500]}..."
    logger.info("%s <- completion: %s", model._llm_type, preview)
    return answer
