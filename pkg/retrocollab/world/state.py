from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Literal

from .geometry import GridCell

LocationKind = Literal["cell", "held", "dustpan", "stack", "bin"]


class WorldError(Exception):
    """Base class for world-module failures."""


class UnknownTaskError(WorldError, KeyError):
    pass


class UnknownRobotError(WorldError, KeyError):
    pass


class SimulationInconsistencyError(WorldError):
    """A plan reached the simulator although a precondition does not hold.

    Validated plans never trigger this; seeing it means the validator and the
    simulator disagree about a rule.
    """


@dataclass(frozen=True, slots=True)
class RobotState:
    name: str
    effector: GridCell
    held: str | None = None


@dataclass(frozen=True, slots=True)
class Location:
    kind: LocationKind
    cell: GridCell | None = None
    holder: str | None = None

    def render(self) -> str:
        if self.kind == "cell":
            return f"@ {self.cell}"
        if self.kind == "held":
            return f"held by {self.holder} @ {self.cell}"
        return f"in {self.kind}"


@dataclass(frozen=True)
class WorldState:
    """Full task state. Instances are never mutated; use :meth:`evolve`."""

    task_id: str
    t: int
    robots: dict[str, RobotState]
    object_names: tuple[str, ...]
    free_objects: dict[str, GridCell]
    door_open: bool | None = None
    stack: tuple[str, ...] | None = None
    dustpan_contents: frozenset[str] = field(default_factory=frozenset)
    bin_contents: frozenset[str] = field(default_factory=frozenset)

    def evolve(self, **changes: Any) -> WorldState:
        return replace(self, **changes)

    def robot(self, name: str) -> RobotState:
        try:
            return self.robots[name]
        except KeyError:
            raise UnknownRobotError(name) from None

    def holder_of(self, obj: str) -> str | None:
        for robot in self.robots.values():
            if robot.held == obj:
                return robot.name
        return None

    def locate(self, obj: str) -> Location:
        if obj in self.free_objects:
            return Location("cell", cell=self.free_objects[obj])
        holder = self.holder_of(obj)
        if holder is not None:
            return Location("held", cell=self.robots[holder].effector, holder=holder)
        if obj in self.dustpan_contents:
            return Location("dustpan")
        if self.stack is not None and obj in self.stack:
            return Location("stack")
        if obj in self.bin_contents:
            return Location("bin")
        raise KeyError(obj)

    @property
    def objects(self) -> dict[str, Location]:
        return {name: self.locate(name) for name in self.object_names}

    def conservation_violations(self) -> list[str]:
        """Objects that are missing or present in more than one location category."""

        counts = dict.fromkeys(self.object_names, 0)
        placed: list[str] = list(self.free_objects)
        placed += [r.held for r in self.robots.values() if r.held is not None]
        placed += list(self.dustpan_contents)
        placed += list(self.stack or ())
        placed += list(self.bin_contents)
        problems = [name for name in placed if name not in counts]
        for name in placed:
            if name in counts:
                counts[name] += 1
        problems += [name for name, count in counts.items() if count != 1]
        return sorted(set(problems))

    def to_dict(self) -> dict[str, Any]:
        objects: dict[str, Any] = {}
        for name in self.object_names:
            location = self.locate(name)
            objects[name] = {
                "location": location.kind,
                "cell": location.cell.as_list() if location.cell else None,
                "holder": location.holder,
            }
        return {
            "task_id": self.task_id,
            "t": self.t,
            "robots": {
                name: {"effector": robot.effector.as_list(), "held": robot.held}
                for name, robot in self.robots.items()
            },
            "objects": objects,
            "door_open": self.door_open,
            "stack": list(self.stack) if self.stack is not None else None,
            "dustpan_contents": sorted(self.dustpan_contents),
            "bin_contents": sorted(self.bin_contents),
        }


@dataclass(frozen=True, slots=True)
class Observation:
    """What one robot perceives: its own hand plus everything inside its reach envelope."""

    robot: str
    effector: GridCell
    held: str | None
    objects: tuple[tuple[str, GridCell], ...]
    landmarks: tuple[tuple[str, GridCell], ...]
    flags: tuple[tuple[str, Any], ...] = ()

    def render(self) -> str:
        lines = [
            f"{self.robot} effector @ {self.effector}",
            f"holding: {self.held or 'none'}",
        ]
        if self.objects:
            lines.append("objects in reach:")
            lines.extend(f"- {name} @ {cell}" for name, cell in self.objects)
        else:
            lines.append("objects in reach: none")
        if self.landmarks:
            lines.append("landmarks in reach:")
            lines.extend(f"- {name} @ {cell}" for name, cell in self.landmarks)
        for key, value in self.flags:
            lines.append(f"{key}: {_render_flag(value)}")
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "robot": self.robot,
            "effector": self.effector.as_list(),
            "held": self.held,
            "objects": {name: cell.as_list() for name, cell in self.objects},
            "landmarks": {name: cell.as_list() for name, cell in self.landmarks},
            "flags": {key: value for key, value in self.flags},
        }


def _render_flag(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(str(item) for item in value) or "empty"
    return str(value)
