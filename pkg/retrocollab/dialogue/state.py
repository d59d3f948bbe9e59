from __future__ import annotations

from dataclasses import dataclass
from typing import TypedDict

from langchain_core.language_models.chat_models import BaseChatModel

from retrocollab.actions.plan import ActionPlan
from retrocollab.memory.prompting import PromptTemplates
from retrocollab.memory.records import LongTermMemory, RoundRecord, TranscriptTurn
from retrocollab.validation.findings import ValidationReport
from retrocollab.world.state import WorldState
from retrocollab.world.tasks import TaskSpec

from .schemas import EpisodeConfig, FailureReason
from .transcript import TranscriptRecorder


class EpisodeState(TypedDict, total=False):
    world: WorldState
    memory: LongTermMemory
    round_index: int
    round_step: int
    steps: int
    replans: int
    step_replans: int
    transcript: list[TranscriptTurn]
    plan_text: str | None
    plan: ActionPlan | None
    plan_error: str | None
    validation: ValidationReport | None
    env_feedback: str | None
    record: RoundRecord | None
    success: bool
    failure_reason: FailureReason | None


@dataclass
class EpisodeContext:
    config: EpisodeConfig
    spec: TaskSpec
    llm1: BaseChatModel
    llm2: BaseChatModel
    recorder: TranscriptRecorder
    templates: PromptTemplates
    max_steps: int
