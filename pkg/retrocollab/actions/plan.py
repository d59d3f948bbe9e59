from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

from retrocollab.world.geometry import GridCell


class Verb(StrEnum):
    PICK = "PICK"
    PLACE = "PLACE"
    MOVE = "MOVE"
    SWEEP = "SWEEP"
    DUMP = "DUMP"
    OPEN = "OPEN"
    WAIT = "WAIT"


@dataclass(frozen=True, slots=True)
class AgentAction:
    agent: str
    verb: Verb
    object: str | None = None
    target: str | GridCell | None = None
    path: tuple[GridCell, ...] = ()

    def final_cell(self, effector: GridCell) -> GridCell:
        """Cell the agent ends on; an empty path keeps the agent where it is."""

        return self.path[-1] if self.path else effector

    def position_at(self, effector: GridCell, micro_step: int) -> GridCell:
        """Lockstep occupancy: exhausted paths hold their last cell."""

        if not self.path:
            return effector
        return self.path[min(micro_step, len(self.path) - 1)]

    def moves(self) -> bool:
        return any(cell != self.path[0] for cell in self.path[1:])


@dataclass(frozen=True, slots=True)
class ActionPlan:
    """One joint action: exactly one :class:`AgentAction` per roster agent."""

    actions: tuple[AgentAction, ...]
    raw_text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        names = [action.agent for action in self.actions]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate agents in plan: {names}")

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(action.agent for action in self.actions)

    def action_for(self, agent: str) -> AgentAction | None:
        for action in self.actions:
            if action.agent == agent:
                return action
        return None

    @property
    def horizon(self) -> int:
        """Length of the longest path, i.e. the number of lockstep micro-steps."""

        return max((len(action.path) for action in self.actions), default=0)


def wait_plan(roster: tuple[str, ...] | list[str]) -> ActionPlan:
    return ActionPlan(tuple(AgentAction(agent=name, verb=Verb.WAIT) for name in roster))
