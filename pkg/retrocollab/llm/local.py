from __future__ import annotations

import re
from typing import Any, ClassVar

from langchain_core.language_models.chat_models import BaseChatModel
from langchain_core.messages import AIMessage, BaseMessage, SystemMessage
from langchain_core.outputs import ChatGeneration, ChatResult

from .fingerprint import plain_text_content

_AGENT_MENTION = re.compile(r"Agent ([A-Za-z_][A-Za-z0-9_]*)")


class LocalCriticModel(BaseChatModel):
    """Deterministic offline critic and proposer used by the oracle backend and in tests."""

    model_name: ClassVar[str] = "local-critic-model"

    def _generate(
        self,
        messages: list[BaseMessage],
        stop: list[str] | None = None,
        run_manager: Any | None = None,
        **kwargs: Any,
    ) -> ChatResult:
        prompt = self._system_prompt(messages)
        role = self._detect_role(prompt)
        if role == "critic":
            answer = self._critique(prompt)
        elif role == "proposer":
            answer = self._proposal(prompt)
        else:
            answer = "I have no plan to add; please propose the next joint action."
        return ChatResult(generations=[ChatGeneration(message=AIMessage(content=answer))])

    async def _agenerate(self, *args: Any, **kwargs: Any) -> ChatResult:  # pragma: no cover
        return self._generate(*args, **kwargs)

    @property
    def _llm_type(self) -> str:
        return self.model_name

    @staticmethod
    def _system_prompt(messages: list[BaseMessage]) -> str:
        for message in messages:
            if isinstance(message, SystemMessage):
                return plain_text_content(message)
        return ""

    @staticmethod
    def _detect_role(prompt: str) -> str:
        lowered = prompt.lower()
        if "you are the action critic" in lowered:
            return "critic"
        if "you are the action proposer" in lowered:
            return "proposer"
        return "agent"

    @staticmethod
    def _block(prompt: str, header: str) -> list[str]:
        """Lines of a ``[Header]`` block inside the current-round section."""

        current = prompt.split("## Current round", 1)[-1]
        lines: list[str] = []
        inside = False
        for line in current.splitlines():
            if line.startswith("## "):
                break
            if line.startswith("["):
                inside = line == f"[{header}]"
                continue
            if inside and line.strip():
                lines.append(line.strip())
        return lines

    def _critique(self, prompt: str) -> str:
        feedback = self._block(prompt, "Validation feedback")
        environment = " ".join(self._block(prompt, "Environment feedback"))
        if not feedback or feedback == ["plan passed validation"]:
            return (
                "The plan agreed upon passed validation. "
                f"Outcome: {environment or 'nothing was executed'} "
                "Keep the assignments that worked and move on to the remaining subgoals."
            )
        return (
            "The plan agreed upon failed validation: "
            + " ".join(feedback)
            + " The agents involved must change their paths or actions before the next attempt."
        )

    def _proposal(self, prompt: str) -> str:
        critique = " ".join(self._block_after(prompt, "## Critique"))
        feedback = self._block(prompt, "Validation feedback")
        agents = sorted(set(_AGENT_MENTION.findall(critique)))
        if not agents:
            return (
                "Each agent should keep its current assignment and continue with the next subgoal."
            )
        suggestions = []
        for agent in agents:
            related = [line for line in feedback if f"Agent {agent}" in line]
            reason = related[0] if related else "see the critique"
            suggestions.append(f"Agent {agent} should revise its action and path ({reason})")
        return "; ".join(suggestions) + "."

    @staticmethod
    def _block_after(prompt: str, heading: str) -> list[str]:
        if heading not in prompt:
            return []
        tail = prompt.split(heading, 1)[1]
        lines = []
        for line in tail.splitlines():
            if line.startswith("## "):
                break
            if line.strip():
                lines.append(line.strip())
        return lines
