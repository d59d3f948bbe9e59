from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from retrocollab.config import Config

BackendKind = Literal["http", "scripted", "replay", "oracle"]
Channel = Literal["llm1", "llm2"]


class BackendConfig(BaseModel):
    """How to reach one chat model. Model identity is configuration only."""

    model_config = ConfigDict(frozen=True)

    kind: BackendKind = Field("http", description="Backend implementation")
    backend_id: str | None = Field(
        None, description="Stable identity hashed into episode fingerprints; defaults to model_name"
    )
    base_url: str | None = Field(None, description="OpenAI-compatible endpoint, e.g. .../v1")
    model_name: str | None = Field(None, description="Model name sent in the request body")
    temperature: float = Field(0.0, ge=0.0)
    max_tokens: int = Field(Config.LLM_MAX_TOKENS, ge=1)
    timeout: float = Field(Config.LLM_TIMEOUT, gt=0, description="Seconds per request")
    max_retries: int = Field(Config.LLM_MAX_RETRIES, ge=0)
    api_key_env: str = Field(
        Config.LLM_API_KEY_ENV, description="Environment variable holding the bearer token"
    )
    script_path: Path | None = Field(None, description="JSON script for the scripted backend")
    replay_path: Path | None = Field(None, description="Transcript served by the replay backend")

    @model_validator(mode="after")
    def _kind_requirements(self) -> BackendConfig:
        if self.kind == "http" and (not self.base_url or not self.model_name):
            raise ValueError("http backends need base_url and model_name")
        if self.kind == "scripted" and self.script_path is None:
            raise ValueError("scripted backends need script_path")
        if self.kind == "replay" and self.replay_path is None:
            raise ValueError("replay backends need replay_path")
        return self

    @property
    def identity(self) -> str:
        return self.backend_id or self.model_name or self.kind

    @classmethod
    def default_llm1(cls) -> BackendConfig:
        return cls(kind="http", base_url=Config.LLM1_BASE_URL, model_name=Config.LLM1_MODEL)

    @classmethod
    def default_llm2(cls) -> BackendConfig:
        return cls(kind="http", base_url=Config.LLM2_BASE_URL, model_name=Config.LLM2_MODEL)


class ScriptEntry(BaseModel):
    response: str = Field(..., description="Completion returned verbatim")
    match: str | None = Field(
        None, description="Only serve this entry when the prompt contains this substring"
    )


class ScriptFile(BaseModel):
    entries: list[ScriptEntry] = Field(default_factory=list)


@dataclass(frozen=True, slots=True)
class BackendScope:
    """Which episode and which model slot a backend instance serves."""

    channel: Channel
    task_id: str | None = None
    seed: int | None = None
