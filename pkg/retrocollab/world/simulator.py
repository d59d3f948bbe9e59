from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NoReturn

from retrocollab.actions.plan import ActionPlan, AgentAction, Verb

from .geometry import GridCell
from .state import Observation, RobotState, SimulationInconsistencyError, WorldState
from .tasks import TaskSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class RopeViolation:
    agent: str
    micro_step: int
    detail: str


def observe(state: WorldState, spec: TaskSpec, robot_name: str) -> Observation:
    robot_spec = spec.robot_spec(robot_name)
    robot = state.robot(robot_name)
    reach = robot_spec.envelope
    objects = tuple(
        (name, cell) for name, cell in sorted(state.free_objects.items()) if reach.contains(cell)
    )
    landmarks = tuple(
        (name, cell) for name, cell in sorted(spec.landmarks.items()) if reach.contains(cell)
    )
    flags: list[tuple[str, object]] = []
    if state.door_open is not None:
        flags.append(("door_open", state.door_open))
    if state.stack is not None:
        flags.append(("stack", list(state.stack)))
    if spec.dustpan is not None:
        flags.append(("dustpan_count", len(state.dustpan_contents)))
    if spec.bin_cell is not None:
        flags.append(("bin_count", len(state.bin_contents)))
    return Observation(
        robot=robot_name,
        effector=robot.effector,
        held=robot.held,
        objects=objects,
        landmarks=landmarks,
        flags=tuple(flags),
    )


def rope_violations(plan: ActionPlan, state: WorldState, spec: TaskSpec) -> list[RopeViolation]:
    """Rope endpoints move together, held by two robots, never farther apart than the rope."""

    rope = spec.rope
    if rope is None:
        return []
    holders = {end: state.holder_of(end) for end in (rope.left, rope.right)}
    moving = {
        end: holder for end, holder in holders.items() if _moves(plan, holder)
    }
    if not moving:
        return []
    violations: list[RopeViolation] = []
    for end, holder in moving.items():
        other = rope.right if end == rope.left else rope.left
        other_holder = holders[other]
        if other_holder is None:
            violations.append(
                RopeViolation(holder, 0, f"{end} moves while {other} is not held")
            )
        elif other not in moving:
            violations.append(
                RopeViolation(holder, 0, f"{end} moves while {other} stays in place")
            )
    if violations:
        return violations
    left_holder, right_holder = holders[rope.left], holders[rope.right]
    left_action, right_action = _action(plan, left_holder), _action(plan, right_holder)
    left_start = state.robot(left_holder).effector
    right_start = state.robot(right_holder).effector
    for step in range(plan.horizon):
        left_cell = left_action.position_at(left_start, step)
        right_cell = right_action.position_at(right_start, step)
        distance = left_cell.l1(right_cell)
        if distance > rope.length:
            detail = f"endpoints {distance} cells apart, rope length is {rope.length}"
            violations.append(RopeViolation(left_holder, step, detail))
            violations.append(RopeViolation(right_holder, step, detail))
            break
    return violations


def apply_plan(
    state: WorldState, spec: TaskSpec, plan: ActionPlan
) -> tuple[WorldState, str]:
    """Execute one validated joint action in lockstep and return the new state plus feedback."""

    actions = _ordered_actions(plan, spec)
    _check_motion(state, spec, plan, actions)
    violations = rope_violations(plan, state, spec)
    if violations:
        raise SimulationInconsistencyError(f"rope constraint broken: {violations[0].detail}")

    finals = {a.agent: a.final_cell(state.robot(a.agent).effector) for a in actions}
    held = {name: robot.held for name, robot in state.robots.items()}
    free = dict(state.free_objects)
    stack = list(state.stack) if state.stack is not None else None
    dustpan = set(state.dustpan_contents)
    bin_contents = set(state.bin_contents)
    door_open = state.door_open
    claimed: set[str] = set()
    placed_cells: set[GridCell] = set()
    openers: dict[str, str] = {}
    notes: list[str] = []

    for action in actions:
        name, final = action.agent, finals[action.agent]
        start_held = state.robot(name).held
        if action.object is not None and action.verb is not Verb.WAIT:
            if action.object in claimed:
                _fail(f"{action.object} is the argument of more than one action")
            claimed.add(action.object)

        if action.verb is Verb.PICK:
            obj = action.object
            if start_held is not None:
                _fail(f"{name} cannot pick {obj}: already holding {start_held}")
            if state.free_objects.get(obj) != final:
                _fail(f"{name} cannot pick {obj}: not at {final}")
            if obj in spec.behind_door and not state.door_open:
                _fail(f"{name} cannot pick {obj}: the door is closed")
            held[name] = obj
            free.pop(obj)
            notes.append(f"{name} picked {obj} at {final}.")

        elif action.verb is Verb.PLACE:
            obj = action.object
            target = spec.resolve_target(action.target)
            if start_held != obj:
                _fail(f"{name} cannot place {obj}: not holding it")
            if target is None or final != target:
                _fail(f"{name} must end on the target of PLACE {obj}")
            if target.z != 0 or not spec.dims.contains(target):
                _fail(f"{name} cannot place {obj} off the table at {target}")
            if target == spec.stack_cell:
                expected = _next_ingredient(spec, stack)
                if obj != expected:
                    _fail(f"{name} cannot stack {obj}: recipe expects {expected}")
                stack.append(obj)
                notes.append(f"{name} stacked {obj} on the {_landmark_name(spec, target)}.")
            else:
                if target in state.free_objects.values() or target in placed_cells:
                    _fail(f"{name} cannot place {obj}: {target} is occupied")
                free[obj] = target
                placed_cells.add(target)
                notes.append(f"{name} placed {obj} at {target}.")
            held[name] = None

        elif action.verb is Verb.SWEEP:
            obj = action.object
            if spec.broom is None or start_held != spec.broom:
                _fail(f"{name} cannot sweep without holding the broom")
            if obj not in state.free_objects:
                _fail(f"{name} cannot sweep {obj}: it is not lying on the table")
            if _sweep_lands(state, spec, finals, name, obj):
                free.pop(obj)
                dustpan.add(obj)
                notes.append(f"{name} swept {obj} into the dustpan.")
            else:
                notes.append(
                    f"{name} swept at {obj} but the broom, {obj} and dustpan were not lined up; "
                    f"{obj} did not move."
                )

        elif action.verb is Verb.DUMP:
            if spec.dustpan is None or start_held != spec.dustpan:
                _fail(f"{name} cannot dump without holding the dustpan")
            if final != spec.bin_cell:
                _fail(f"{name} must dump at the bin {spec.bin_cell}")
            count = len(dustpan)
            bin_contents |= dustpan
            dustpan = set()
            notes.append(f"{name} dumped {count} object(s) into the bin.")

        elif action.verb is Verb.OPEN:
            if spec.handles is None or action.target not in spec.handles:
                _fail(f"{name} cannot open {action.target}: not a door handle")
            if final != spec.landmarks[action.target]:
                _fail(f"{name} must end on {action.target} to open it")
            openers[name] = action.target

    if openers:
        notes.append(_resolve_door(spec, door_open, openers))
        if door_open is False and set(openers.values()) == set(spec.handles or ()):
            door_open = True

    robots = {
        name: RobotState(name=name, effector=finals[name], held=held[name])
        for name in state.robots
    }
    new_state = state.evolve(
        t=state.t + 1,
        robots=robots,
        free_objects=free,
        stack=tuple(stack) if stack is not None else None,
        dustpan_contents=frozenset(dustpan),
        bin_contents=frozenset(bin_contents),
        door_open=door_open,
    )
    feedback = f"Step {new_state.t}: " + (" ".join(notes) if notes else "no object changed.")
    logger.debug("apply_plan %s t=%s -> %s", spec.task_id, new_state.t, feedback)
    return new_state, feedback


def is_success(state: WorldState, spec: TaskSpec) -> bool:
    if spec.task_id == "sort_cubes":
        return all(
            state.free_objects.get(cube) == spec.landmarks[pad] for cube, pad in spec.pads.items()
        )
    if spec.task_id == "make_sandwich":
        return state.stack == spec.recipe
    if spec.task_id == "arrange_cabinet":
        cup_home = all(state.free_objects.get(obj) == cell for obj, cell in spec.goal_cells.items())
        return bool(state.door_open) and cup_home
    if spec.task_id == "sweep_floor":
        return set(spec.trash) <= state.bin_contents
    if spec.task_id == "move_rope":
        rope = spec.rope
        left = state.free_objects.get(rope.left)
        right = state.free_objects.get(rope.right)
        if left is None or right is None:
            return False
        if left not in rope.tray_cells or right not in rope.tray_cells:
            return False
        delta = left.delta(right)
        negated = tuple(-v for v in rope.orientation)
        return delta in (rope.orientation, negated)
    return False


def _ordered_actions(plan: ActionPlan, spec: TaskSpec) -> list[AgentAction]:
    if sorted(plan.agents) != sorted(spec.roster):
        _fail(f"plan covers {list(plan.agents)}, roster is {list(spec.roster)}")
    return [plan.action_for(name) for name in spec.roster]


def _check_motion(
    state: WorldState, spec: TaskSpec, plan: ActionPlan, actions: list[AgentAction]
) -> None:
    for action in actions:
        robot_spec = spec.robot_spec(action.agent)
        effector = state.robot(action.agent).effector
        path = action.path
        if path and path[0] != effector:
            _fail(f"{action.agent} path starts at {path[0]}, effector is at {effector}")
        for before, after in zip(path, path[1:], strict=False):
            if before.l1(after) > 1:
                _fail(f"{action.agent} jumps from {before} to {after}")
        for cell in path:
            if not spec.dims.contains(cell) or not robot_spec.envelope.contains(cell):
                _fail(f"{action.agent} cannot reach {cell}")

    starts = {a.agent: state.robot(a.agent).effector for a in actions}
    previous: dict[str, GridCell] | None = None
    for step in range(plan.horizon):
        current = {a.agent: a.position_at(starts[a.agent], step) for a in actions}
        if len(set(current.values())) < len(current):
            _fail(f"effectors share a cell at micro-step {step}")
        if previous is not None:
            for a in current:
                for b in current:
                    if a < b and current[a] == previous[b] and current[b] == previous[a]:
                        if current[a] != previous[a]:
                            _fail(f"{a} and {b} swap cells at micro-step {step}")
        previous = current


def _sweep_lands(
    state: WorldState, spec: TaskSpec, finals: dict[str, GridCell], sweeper: str, obj: str
) -> bool:
    obj_cell = state.free_objects[obj]
    broom_cell = finals[sweeper]
    if not broom_cell.is_adjacent(obj_cell):
        return False
    dx, dy, dz = broom_cell.delta(obj_cell)
    landing = obj_cell.offset(dx, dy, dz)
    return any(
        robot.held == spec.dustpan and finals[name] == landing
        for name, robot in state.robots.items()
        if name != sweeper
    )


def _resolve_door(spec: TaskSpec, door_open: bool | None, openers: dict[str, str]) -> str:
    who = ", ".join(f"{agent} at {handle}" for agent, handle in openers.items())
    if door_open:
        return f"The door is already open ({who}); nothing changed."
    if set(openers.values()) == set(spec.handles or ()):
        return f"The door is open ({who})."
    return (
        f"Incomplete joint action: OPEN needs two robots at both handles in the same step ({who}); "
        "the door stays closed."
    )


def _next_ingredient(spec: TaskSpec, stack: list[str] | None) -> str | None:
    if spec.recipe is None or stack is None or len(stack) >= len(spec.recipe):
        return None
    return spec.recipe[len(stack)]


def _landmark_name(spec: TaskSpec, cell: GridCell) -> str:
    for name, landmark in spec.landmarks.items():
        if landmark == cell:
            return name
    return str(cell)


def _action(plan: ActionPlan, agent: str | None) -> AgentAction | None:
    return plan.action_for(agent) if agent is not None else None


def _moves(plan: ActionPlan, agent: str | None) -> bool:
    action = _action(plan, agent)
    return action is not None and action.moves()


def _fail(message: str) -> NoReturn:
    raise SimulationInconsistencyError(message)
