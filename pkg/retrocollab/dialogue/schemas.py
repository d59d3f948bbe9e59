from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from retrocollab.config import Config
from retrocollab.llm.schemas import BackendConfig
from retrocollab.world.tasks import TASK_IDS

__all__ = ["EpisodeConfig", "EpisodeResult", "FailureReason"]

FailureReason = Literal["step_budget", "replan_budget", "backend_error", "internal_error"]


class EpisodeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str = Field(..., description="One of the five task ids")
    seed: int = Field(0, ge=0, description="Initial layout seed")
    memory_capacity: int = Field(Config.MEMORY_CAPACITY, ge=1, description="Rounds kept in memory")
    max_discussion_turns: int = Field(
        6, ge=1, description="Discussion turns per agent before the round is abandoned"
    )
    max_replans_per_step: int = Field(3, ge=1, description="Rejected plans tolerated per step")
    max_steps: int | None = Field(
        None, ge=1, description="Executed steps before giving up; defaults to the task's limit"
    )
    retrospection: bool = Field(
        True, description="Run the critic and proposer after every round"
    )
    max_prompt_chars: int = Field(Config.MAX_PROMPT_CHARS, ge=1)
    llm1: BackendConfig = Field(default_factory=BackendConfig.default_llm1)
    llm2: BackendConfig = Field(default_factory=BackendConfig.default_llm2)

    @field_validator("task_id")
    @classmethod
    def _known_task(cls, value: str) -> str:
        if value not in TASK_IDS:
            raise ValueError(f"unknown task {value!r}; expected one of {', '.join(TASK_IDS)}")
        return value

    def fingerprint_payload(self) -> dict[str, Any]:
        """Everything that determines an episode, minus how the backends are reached."""

        return {
            "task_id": self.task_id,
            "seed": self.seed,
            "memory_capacity": self.memory_capacity,
            "max_discussion_turns": self.max_discussion_turns,
            "max_replans_per_step": self.max_replans_per_step,
            "max_steps": self.max_steps,
            "retrospection": self.retrospection,
            "max_prompt_chars": self.max_prompt_chars,
            "llm1": self.llm1.identity,
            "llm2": self.llm2.identity,
        }

    @property
    def fingerprint(self) -> str:
        canonical = json.dumps(self.fingerprint_payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def episode_id(self) -> str:
        return f"{self.task_id}-s{self.seed}-{self.fingerprint[:8]}"


class EpisodeResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    episode_id: str
    task_id: str
    seed: int
    success: bool
    steps: int = Field(..., ge=0, description="Executed environment steps")
    replans: int = Field(..., ge=0, description="Rejected plans over the whole episode")
    rounds: int = Field(0, ge=0, description="Committed rounds, executed or rejected")
    failure_reason: FailureReason | None = None
    config_fingerprint: str
    transcript_path: Path | None = None

    @model_validator(mode="after")
    def _success_has_no_reason(self) -> EpisodeResult:
        if self.success and self.failure_reason is not None:
            raise ValueError("a successful episode has no failure reason")
        if not self.success and self.failure_reason is None:
            raise ValueError("a failed episode needs a failure reason")
        return self

    def outcome(self) -> dict[str, Any]:
        """Result fields that a replay must reproduce."""

        return self.model_dump(mode="json", exclude={"transcript_path"})
