from .errors import MemoryOrderError, MemoryStoreError, TemplateNotFoundError
from .prompting import (
    AGENT_SECTIONS,
    CRITIC_INSTRUCTION,
    PROPOSER_INSTRUCTION,
    PromptRole,
    PromptTemplates,
    PromptText,
    construct_prompt,
    render_history,
)
from .records import LongTermMemory, RoundRecord, TranscriptTurn, commit_round

__all__ = [
    "AGENT_SECTIONS",
    "CRITIC_INSTRUCTION",
    "PROPOSER_INSTRUCTION",
    "LongTermMemory",
    "MemoryOrderError",
    "MemoryStoreError",
    "PromptRole",
    "PromptTemplates",
    "PromptText",
    "RoundRecord",
    "TemplateNotFoundError",
    "TranscriptTurn",
    "commit_round",
    "construct_prompt",
    "render_history",
]
