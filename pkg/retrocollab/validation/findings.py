from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

FindingKind = Literal[
    "ik_failure",
    "collision",
    "swap_collision",
    "subgoal_infeasible",
    "joint_action_incomplete",
    "rope_constraint",
]

_TEMPLATES: dict[str, str] = {
    "ik_failure": (
        "The path for Agent {agent} is not reachable at step {step}: {detail}; "
        "keep the path inside its reach."
    ),
    "collision": (
        "The path for Agent {agent} collides with Agent {other} at step {step}; adjust the path."
    ),
    "swap_collision": (
        "The path for Agent {agent} swaps cells with Agent {other} at step {step}; "
        "adjust the path."
    ),
    "subgoal_infeasible": "Agent {agent} cannot complete its action at step {step}: {detail}.",
    "joint_action_incomplete": (
        "Agent {agent} started a joint action that is incomplete at step {step}: {detail}."
    ),
    "rope_constraint": "Agent {agent} breaks the rope constraint at step {step}: {detail}.",
}


class Finding(BaseModel):
    model_config = ConfigDict(frozen=True)

    agent: str = Field(..., description="Agent whose action is at fault")
    micro_step: int = Field(..., ge=0, description="Lockstep micro-step of the problem")
    kind: FindingKind = Field(..., description="Problem category")
    detail: str = Field("", description="Human-readable specifics")
    other: str | None = Field(None, description="Counterpart agent for collisions")

    def render(self) -> str:
        return _TEMPLATES[self.kind].format(
            agent=self.agent,
            other=self.other or "another agent",
            step=self.micro_step,
            detail=self.detail,
        )

    def sort_key(self) -> tuple[str, int, str, str, str]:
        return (self.agent, self.micro_step, self.kind, self.other or "", self.detail)


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    ok: bool = Field(..., description="True when the plan may be executed")
    findings: list[Finding] = Field(default_factory=list)
    feedback_text: str = Field("", description="Rendered findings, one per line")

    @model_validator(mode="after")
    def _consistent(self) -> ValidationReport:
        if self.ok != (not self.findings):
            raise ValueError("ok must be true exactly when there are no findings")
        if bool(self.feedback_text) == self.ok:
            raise ValueError("feedback_text must be present exactly when the plan is rejected")
        return self

    @classmethod
    def from_findings(cls, findings: list[Finding]) -> ValidationReport:
        unique = sorted(set(findings), key=Finding.sort_key)
        text = "\n".join(finding.render() for finding in unique)
        return cls(ok=not unique, findings=unique, feedback_text=text)
