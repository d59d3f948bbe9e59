from __future__ import annotations

import logging

from pydantic import BaseModel, ConfigDict, Field, model_validator

from retrocollab.validation.findings import ValidationReport

from .errors import MemoryOrderError

logger = logging.getLogger(__name__)

__all__ = ["LongTermMemory", "RoundRecord", "TranscriptTurn", "commit_round"]


class TranscriptTurn(BaseModel):
    model_config = ConfigDict(frozen=True)

    agent: str = Field(..., description="Speaker of the message")
    message: str = Field(..., description="Raw model completion")


class RoundRecord(BaseModel):
    """Everything that happened in one planning round (the short-term memory)."""

    model_config = ConfigDict(frozen=True)

    round_index: int = Field(..., ge=0, description="Monotone round counter of the episode")
    step: int = Field(0, ge=0, description="Environment step the round belongs to")
    transcript: list[TranscriptTurn] = Field(..., min_length=1)
    validation: ValidationReport | None = Field(
        None, description="Validation outcome; absent when no plan could be parsed"
    )
    plan_error: str | None = Field(
        None, description="Parse or discussion failure shown to the agents"
    )
    critique: str | None = None
    proposal: str | None = None
    env_feedback: str | None = None

    @model_validator(mode="after")
    def _retrospection_pair(self) -> RoundRecord:
        if (self.critique is None) != (self.proposal is None):
            raise ValueError("critique and proposal are produced together")
        return self

    @property
    def feedback_text(self) -> str:
        """Validation feedback, or the plan error when there was nothing to validate."""

        if self.validation is not None and not self.validation.ok:
            return self.validation.feedback_text
        return self.plan_error or ""

    def render(self) -> str:
        lines = [f"Round {self.round_index} (step {self.step}):", "[Discussion]"]
        lines += [f"{turn.agent}: {turn.message.strip()}" for turn in self.transcript]
        lines += ["[Validation feedback]", self.feedback_text or "plan passed validation"]
        if self.critique is not None:
            lines += ["[Critique]", self.critique.strip()]
            lines += ["[Proposal]", self.proposal.strip()]
        lines += ["[Environment feedback]", self.env_feedback or "plan was not executed"]
        return "\n".join(lines)


class LongTermMemory(BaseModel):
    model_config = ConfigDict(frozen=True)

    capacity: int = Field(2, ge=1, description="Number of most recent rounds kept")
    records: list[RoundRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _bounded_and_ordered(self) -> LongTermMemory:
        if len(self.records) > self.capacity:
            raise ValueError("more records than capacity")
        indices = [record.round_index for record in self.records]
        if any(a >= b for a, b in zip(indices, indices[1:], strict=False)):
            raise ValueError("records must be in ascending round order")
        return self

    @property
    def latest(self) -> RoundRecord | None:
        return self.records[-1] if self.records else None

    def round_indices(self) -> list[int]:
        return [record.round_index for record in self.records]


def commit_round(memory: LongTermMemory, record: RoundRecord) -> LongTermMemory:
    """Append ``record`` and drop the oldest rounds beyond capacity."""

    if memory.records and record.round_index <= memory.records[-1].round_index:
        raise MemoryOrderError(
            f"round {record.round_index} committed after round {memory.records[-1].round_index}"
        )
    records = [*memory.records, record][-memory.capacity :]
    logger.debug("commit_round %s -> kept %s", record.round_index, [r.round_index for r in records])
    return LongTermMemory(capacity=memory.capacity, records=records)
