from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import Literal

from langchain_core.prompts import PromptTemplate
from pydantic import BaseModel, ConfigDict, Field

from retrocollab.world.state import Observation
from retrocollab.world.tasks import TaskSpec

from .errors import TemplateNotFoundError
from .records import LongTermMemory, RoundRecord

logger = logging.getLogger(__name__)

__all__ = [
    "AGENT_SECTIONS",
    "CRITIC_INSTRUCTION",
    "PROPOSER_INSTRUCTION",
    "PromptRole",
    "PromptTemplates",
    "PromptText",
    "construct_prompt",
    "render_history",
]

PromptRole = Literal["agent_discussion", "critic", "proposer"]

AGENT_SECTIONS: tuple[str, ...] = (
    "task context",
    "round history",
    "agent capability",
    "communication guidelines",
    "observation",
    "feedback",
)

CRITIC_INSTRUCTION = (
    "based on the feedback and the conversation among agents, please critique the plan agreed "
    "upon and what can possibly be done to improve performance"
)
PROPOSER_INSTRUCTION = (
    "please provide detailed suggestions on how each agent should modify the current plan"
)

NO_HISTORY = "none"
DEFAULT_TEMPLATE_DIR = Path(__file__).parent / "templates"


class PromptText(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: PromptRole
    sections: list[tuple[str, str]] = Field(..., description="Ordered (section name, body) pairs")
    rendered: str = Field(..., description="Full prompt text sent as the system message")

    def section(self, name: str) -> str:
        for section_name, body in self.sections:
            if section_name == name:
                return body
        raise KeyError(name)


class PromptTemplates:
    """Plain-text section templates: ``<root>/<task_id>/<name>.txt`` and ``<root>/<name>.txt``."""

    def __init__(self, root: Path | str | None = None) -> None:
        self.root = Path(root) if root is not None else DEFAULT_TEMPLATE_DIR

    def task_section(self, task_id: str, name: str, **values: str) -> str:
        return _format(_load_template(str(self.root / task_id / f"{name}.txt")), values)

    def role_section(self, name: str, **values: str) -> str:
        return _format(_load_template(str(self.root / f"{name}.txt")), values)

    def check(self, task_id: str) -> None:
        """Fail early when any template an episode needs is missing."""

        for name in ("context", "capability", "guidelines"):
            _load_template(str(self.root / task_id / f"{name}.txt"))
        for name in ("critic", "proposer"):
            _load_template(str(self.root / f"{name}.txt"))


def construct_prompt(
    observation: Observation | None,
    task_description: str,
    memory: LongTermMemory,
    role: PromptRole,
    spec: TaskSpec,
    agent_name: str | None = None,
    *,
    short_term: RoundRecord | None = None,
    critique: str | None = None,
    templates: PromptTemplates | None = None,
) -> PromptText:
    """Build the prompt of one agent turn, or of the critic or proposer pass."""

    templates = templates or PromptTemplates()
    roster = ", ".join(spec.roster)
    context = templates.task_section(
        spec.task_id, "context", task_description=task_description, roster=roster
    )
    history = render_history(memory)

    if role == "agent_discussion":
        if agent_name is None or observation is None:
            raise ValueError("agent_discussion prompts need an agent name and an observation")
        robot = spec.robot_spec(agent_name)
        sections = [
            ("task context", context),
            ("round history", history),
            (
                "agent capability",
                templates.task_section(
                    spec.task_id,
                    "capability",
                    agent_name=agent_name,
                    reach=robot.envelope.render(),
                ),
            ),
            (
                "communication guidelines",
                templates.task_section(
                    spec.task_id, "guidelines", agent_name=agent_name, roster=roster
                ),
            ),
            ("observation", observation.render()),
            ("feedback", _latest_feedback(memory)),
        ]
    elif role == "critic":
        if short_term is None:
            raise ValueError("critic prompts need the short-term record")
        sections = [
            ("task context", context),
            ("round history", history),
            ("current round", short_term.render()),
            ("instruction", templates.role_section("critic", roster=roster)),
        ]
    elif role == "proposer":
        if short_term is None or critique is None:
            raise ValueError("proposer prompts need the short-term record and the critique")
        sections = [
            ("task context", context),
            ("round history", history),
            ("current round", short_term.render()),
            ("critique", critique.strip()),
            ("instruction", templates.role_section("proposer", roster=roster)),
        ]
    else:
        raise ValueError(f"unknown prompt role {role!r}")

    rendered = "\n\n".join(f"## {name.capitalize()}\n{body}" for name, body in sections)
    return PromptText(role=role, sections=sections, rendered=rendered)


def render_history(memory: LongTermMemory) -> str:
    if not memory.records:
        return NO_HISTORY
    return "\n\n".join(record.render() for record in memory.records)


def _latest_feedback(memory: LongTermMemory) -> str:
    latest = memory.latest
    if latest is None:
        return NO_HISTORY
    lines = []
    if latest.feedback_text:
        lines.append(f"Validation: {latest.feedback_text}")
    if latest.env_feedback:
        lines.append(f"Environment: {latest.env_feedback}")
    return "\n".join(lines) or NO_HISTORY


@lru_cache(maxsize=64)
def _load_template(path: str) -> PromptTemplate:
    if not Path(path).is_file():
        raise TemplateNotFoundError(path)
    logger.debug("loading prompt template %s", path)
    return PromptTemplate.from_file(path, encoding="utf-8")


def _format(template: PromptTemplate, values: dict[str, str]) -> str:
    wanted = {key: value for key, value in values.items() if key in template.input_variables}
    return template.format(**wanted).strip()
