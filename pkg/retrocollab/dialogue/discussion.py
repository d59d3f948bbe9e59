from __future__ import annotations

import logging
from dataclasses import dataclass

from langchain_core.language_models.chat_models import BaseChatModel
from langchain_core.messages import BaseMessage, HumanMessage, SystemMessage

from retrocollab.actions.parser import extract_execute_block
from retrocollab.llm.backends import complete
from retrocollab.llm.errors import LLMError
from retrocollab.llm.fingerprint import completion_digest, message_payload, request_fingerprint
from retrocollab.memory.prompting import (
    CRITIC_INSTRUCTION,
    PROPOSER_INSTRUCTION,
    PromptTemplates,
    construct_prompt,
)
from retrocollab.memory.records import LongTermMemory, RoundRecord, TranscriptTurn
from retrocollab.world.simulator import observe
from retrocollab.world.state import WorldState
from retrocollab.world.tasks import TaskSpec

from .schemas import EpisodeConfig
from .transcript import TranscriptRecorder

logger = logging.getLogger(__name__)

__all__ = ["DiscussionOutcome", "retrospect", "run_discussion"]


@dataclass(frozen=True, slots=True)
class DiscussionOutcome:
    transcript: list[TranscriptTurn]
    plan_text: str | None

    @property
    def failed(self) -> bool:
        return self.plan_text is None


def run_discussion(
    state: WorldState,
    spec: TaskSpec,
    memory: LongTermMemory,
    backend: BaseChatModel,
    config: EpisodeConfig,
    *,
    templates: PromptTemplates | None = None,
    recorder: TranscriptRecorder | None = None,
) -> DiscussionOutcome:
    """Round-robin agent turns until someone writes an EXECUTE block or the turn cap is hit."""

    templates = templates or PromptTemplates()
    transcript: list[TranscriptTurn] = []
    limit = config.max_discussion_turns * len(spec.roster)
    for turn in range(limit):
        agent = spec.roster[turn % len(spec.roster)]
        prompt = construct_prompt(
            observe(state, spec, agent),
            spec.goal,
            memory,
            "agent_discussion",
            spec,
            agent,
            templates=templates,
        )
        messages = [
            SystemMessage(content=prompt.rendered),
            HumanMessage(content=_discussion_request(agent, transcript)),
        ]
        try:
            text = _request(
                backend,
                messages,
                channel="llm1",
                role="agent_discussion",
                agent=agent,
                recorder=recorder,
                max_prompt_chars=config.max_prompt_chars,
            )
        except LLMError as exc:
            exc.add_note(f"discussion turn {turn} ({agent})")
            raise
        transcript.append(TranscriptTurn(agent=agent, message=text))
        block = extract_execute_block(text)
        if block is not None:
            logger.info(
                "%s t=%s: %s closed the discussion after %d turns",
                spec.task_id,
                state.t,
                agent,
                turn + 1,
            )
            return DiscussionOutcome(transcript, block)
    logger.info("%s t=%s: no EXECUTE block after %d turns", spec.task_id, state.t, limit)
    return DiscussionOutcome(transcript, None)


def retrospect(
    short_term: RoundRecord,
    backend: BaseChatModel,
    config: EpisodeConfig,
    spec: TaskSpec,
    memory: LongTermMemory,
    *,
    templates: PromptTemplates | None = None,
    recorder: TranscriptRecorder | None = None,
) -> tuple[str, str]:
    """Critic pass, then proposer pass over the same round; both texts are returned verbatim."""

    templates = templates or PromptTemplates()
    critic_prompt = construct_prompt(
        None, spec.goal, memory, "critic", spec, short_term=short_term, templates=templates
    )
    critique = _request(
        backend,
        [
            SystemMessage(content=critic_prompt.rendered),
            HumanMessage(content=_sentence(CRITIC_INSTRUCTION)),
        ],
        channel="llm2",
        role="critic",
        agent=None,
        recorder=recorder,
        max_prompt_chars=config.max_prompt_chars,
    )
    proposer_prompt = construct_prompt(
        None,
        spec.goal,
        memory,
        "proposer",
        spec,
        short_term=short_term,
        critique=critique,
        templates=templates,
    )
    proposal = _request(
        backend,
        [
            SystemMessage(content=proposer_prompt.rendered),
            HumanMessage(content=_sentence(PROPOSER_INSTRUCTION)),
        ],
        channel="llm2",
        role="proposer",
        agent=None,
        recorder=recorder,
        max_prompt_chars=config.max_prompt_chars,
    )
    return critique, proposal


def _discussion_request(agent: str, transcript: list[TranscriptTurn]) -> str:
    if transcript:
        so_far = "\n".join(f"{turn.agent}: {turn.message.strip()}" for turn in transcript)
    else:
        so_far = "(no messages yet)"
    return (
        f"Discussion so far:\n{so_far}\n\n"
        f"You are {agent}. Write your next message, starting with '{agent}:'. "
        "If the team has agreed, end it with EXECUTE and the plan."
    )


def _sentence(instruction: str) -> str:
    return instruction[0].upper() + instruction[1:] + "."


def _request(
    backend: BaseChatModel,
    messages: list[BaseMessage],
    *,
    channel: str,
    role: str,
    agent: str | None,
    recorder: TranscriptRecorder | None,
    max_prompt_chars: int,
) -> str:
    fingerprint = request_fingerprint(messages)
    k = recorder.next_request() if recorder is not None else 0
    if recorder is not None:
        recorder.emit(
            "prompt",
            k=k,
            backend=channel,
            role=role,
            agent=agent,
            fingerprint=fingerprint,
            messages=message_payload(messages),
        )
    text = complete(backend, messages, max_prompt_chars=max_prompt_chars)
    if recorder is not None:
        recorder.emit(
            "completion",
            k=k,
            backend=channel,
            role=role,
            agent=agent,
            fingerprint=fingerprint,
            digest=completion_digest(fingerprint, text),
            text=text,
        )
    return text
