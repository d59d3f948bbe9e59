"""Built-in reference planner.

Produces a known-good joint action for every step of a task, which is used to script the
LLM1 backend of oracle episodes. Paths come from prioritized search in a time-expanded grid
that avoids vertex and swap conflicts with the paths planned before; the rope is carried by
rigid translation so its endpoints never change distance.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Callable, Mapping
from dataclasses import dataclass

from retrocollab.actions.parser import render_plan
from retrocollab.actions.plan import ActionPlan, AgentAction, Verb
from retrocollab.llm.schemas import ScriptEntry
from retrocollab.validation.checks import validate
from retrocollab.world.geometry import GridCell, GridDims, ReachEnvelope
from retrocollab.world.simulator import apply_plan, is_success
from retrocollab.world.state import WorldState
from retrocollab.world.tasks import TaskSpec, load_task

logger = logging.getLogger(__name__)

__all__ = ["OraclePlanningError", "next_plan", "oracle_plans", "oracle_script", "plan_paths"]

SEARCH_HORIZON = 40
SWEEP_DIRECTIONS: tuple[tuple[int, int, int], ...] = (
    (0, 1, 0),
    (0, -1, 0),
    (1, 0, 0),
    (-1, 0, 0),
)


class OraclePlanningError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Assignment:
    verb: Verb
    goal: GridCell
    object: str | None = None
    target: str | GridCell | None = None


def oracle_plans(task_id: str, seed: int) -> list[ActionPlan]:
    """Joint actions that solve the task from its seeded initial state."""

    spec, state = load_task(task_id, seed)
    plans: list[ActionPlan] = []
    while not is_success(state, spec):
        if len(plans) >= spec.max_steps:
            raise OraclePlanningError(
                f"{task_id}/{seed}: no solution within {spec.max_steps} steps"
            )
        plan = next_plan(state, spec)
        report = validate(plan, state, spec)
        if not report.ok:
            raise OraclePlanningError(f"{task_id}/{seed}: {report.feedback_text}")
        state, _ = apply_plan(state, spec, plan)
        plans.append(plan)
    logger.info("oracle %s seed=%s solved in %d steps", task_id, seed, len(plans))
    return plans


def oracle_script(task_id: str, seed: int) -> list[ScriptEntry]:
    """One LLM1 reply per step: the first speaker proposes the plan and ends the discussion."""

    spec, _ = load_task(task_id, seed)
    speaker = spec.roster[0]
    return [
        ScriptEntry(
            response=(
                f"{speaker}: I propose this joint action for the step.\n"
                f"EXECUTE\n{render_plan(plan, spec.roster)}\n"
            )
        )
        for plan in oracle_plans(task_id, seed)
    ]


def next_plan(state: WorldState, spec: TaskSpec) -> ActionPlan:
    assignments = _POLICIES[spec.task_id](state, spec)
    for name in spec.roster:
        if name not in assignments:
            home = spec.robot_spec(name).home
            if state.robot(name).effector != home:
                assignments[name] = Assignment(Verb.MOVE, home)

    if spec.rope is not None and _carrying_rope(state, spec):
        paths = _rigid_rope_paths(state, spec, assignments)
    else:
        goals = {name: a.goal for name, a in assignments.items() if a.verb is not Verb.WAIT}
        paths = plan_paths(state, spec, goals)

    actions = []
    for name in spec.roster:
        assignment = assignments.get(name)
        if assignment is None or assignment.verb is Verb.WAIT:
            actions.append(AgentAction(agent=name, verb=Verb.WAIT))
            continue
        actions.append(
            AgentAction(
                agent=name,
                verb=assignment.verb,
                object=assignment.object,
                target=assignment.target,
                path=paths[name],
            )
        )
    return ActionPlan(tuple(actions))


def plan_paths(
    state: WorldState, spec: TaskSpec, goals: Mapping[str, GridCell]
) -> dict[str, tuple[GridCell, ...]]:
    """Conflict-free paths to ``goals``; robots without a goal stay where they are."""

    starts = {name: state.robot(name).effector for name in state.robots}
    standing = {starts[name] for name in state.robots if name not in goals}
    planned: dict[str, list[GridCell]] = {}
    for name in _planning_order(starts, goals, spec.roster):
        waiting = {starts[other] for other in goals if other not in planned and other != name}
        path = _search(
            starts[name],
            goals[name],
            spec.robot_spec(name).envelope,
            spec.dims,
            planned,
            standing | waiting,
        )
        if path is None:
            raise OraclePlanningError(f"no path for {name} to {goals[name]}")
        planned[name] = path
    return {name: tuple(path) for name, path in planned.items()}


def _planning_order(
    starts: Mapping[str, GridCell], goals: Mapping[str, GridCell], roster: tuple[str, ...]
) -> list[str]:
    """Roster order, except that a robot leaves a cell before another robot targets it."""

    remaining = [name for name in roster if name in goals]
    order: list[str] = []
    while remaining:
        for name in remaining:
            blocked = any(
                starts[other] == goals[name] for other in remaining if other != name
            )
            if not blocked:
                break
        else:
            name = remaining[0]
        order.append(name)
        remaining.remove(name)
    return order


def _at(path: list[GridCell], t: int) -> GridCell:
    return path[min(t, len(path) - 1)]


def _search(
    start: GridCell,
    goal: GridCell,
    reach: ReachEnvelope,
    dims: GridDims,
    planned: Mapping[str, list[GridCell]],
    blocked: set[GridCell],
) -> list[GridCell] | None:
    parents: dict[tuple[GridCell, int], tuple[GridCell, int] | None] = {(start, 0): None}
    queue: deque[tuple[GridCell, int]] = deque([(start, 0)])
    while queue:
        cell, t = queue.popleft()
        if cell == goal and _stays_free(goal, t, planned):
            return _unwind(parents, (cell, t))
        if t >= SEARCH_HORIZON:
            continue
        for nxt in (*cell.neighbors(), cell):
            if (nxt, t + 1) in parents or nxt in blocked:
                continue
            if not dims.contains(nxt) or not reach.contains(nxt):
                continue
            if _conflicts(cell, nxt, t, planned):
                continue
            parents[(nxt, t + 1)] = (cell, t)
            queue.append((nxt, t + 1))
    return None


def _conflicts(
    cell: GridCell, nxt: GridCell, t: int, planned: Mapping[str, list[GridCell]]
) -> bool:
    for path in planned.values():
        other_now, other_next = _at(path, t), _at(path, t + 1)
        if other_next == nxt:
            return True
        if other_next == cell and other_now == nxt:
            return True
    return False


def _stays_free(goal: GridCell, t: int, planned: Mapping[str, list[GridCell]]) -> bool:
    return all(
        _at(path, later) != goal
        for path in planned.values()
        for later in range(t, max(len(path), t + 1))
    )


def _unwind(
    parents: dict[tuple[GridCell, int], tuple[GridCell, int] | None], node: tuple[GridCell, int]
) -> list[GridCell]:
    cells: list[GridCell] = []
    current: tuple[GridCell, int] | None = node
    while current is not None:
        cells.append(current[0])
        current = parents[current]
    cells.reverse()
    return cells


def _carrying_rope(state: WorldState, spec: TaskSpec) -> bool:
    rope = spec.rope
    return state.holder_of(rope.left) is not None and state.holder_of(rope.right) is not None


def _rigid_rope_paths(
    state: WorldState, spec: TaskSpec, assignments: Mapping[str, Assignment]
) -> dict[str, tuple[GridCell, ...]]:
    rope = spec.rope
    lead, follow = state.holder_of(rope.left), state.holder_of(rope.right)
    lead_start, follow_start = state.robot(lead).effector, state.robot(follow).effector
    offset = lead_start.delta(follow_start)
    goal = assignments[lead].goal
    lead_reach, follow_reach = spec.robot_spec(lead).envelope, spec.robot_spec(follow).envelope

    def fits(cell: GridCell) -> bool:
        partner = cell.offset(*offset)
        return (
            spec.dims.contains(cell)
            and spec.dims.contains(partner)
            and lead_reach.contains(cell)
            and follow_reach.contains(partner)
        )

    parents: dict[GridCell, GridCell | None] = {lead_start: None}
    queue: deque[GridCell] = deque([lead_start])
    while queue:
        cell = queue.popleft()
        if cell == goal:
            break
        for nxt in cell.neighbors():
            if nxt not in parents and fits(nxt):
                parents[nxt] = cell
                queue.append(nxt)
    else:
        raise OraclePlanningError(f"the rope cannot be carried to {goal}")

    lead_path: list[GridCell] = []
    current: GridCell | None = goal
    while current is not None:
        lead_path.append(current)
        current = parents[current]
    lead_path.reverse()
    follow_path = [cell.offset(*offset) for cell in lead_path]
    return {lead: tuple(lead_path), follow: tuple(follow_path)}


def _reaches(spec: TaskSpec, name: str, *cells: GridCell) -> bool:
    reach = spec.robot_spec(name).envelope
    return all(reach.contains(cell) for cell in cells)


def _free_hand(state: WorldState, name: str) -> bool:
    return state.robot(name).held is None


def _sort_cubes(state: WorldState, spec: TaskSpec) -> dict[str, Assignment]:
    assignments: dict[str, Assignment] = {}
    for name in spec.roster:
        held = state.robot(name).held
        if held in spec.pads:
            pad = spec.pads[held]
            assignments[name] = Assignment(Verb.PLACE, spec.landmarks[pad], held, pad)
    for cube, pad in spec.pads.items():
        cell = state.free_objects.get(cube)
        if cell is None or cell == spec.landmarks[pad]:
            continue
        for name in spec.roster:
            if name in assignments or not _free_hand(state, name):
                continue
            if _reaches(spec, name, cell, spec.landmarks[pad]):
                assignments[name] = Assignment(Verb.PICK, cell, cube)
                break
    return assignments


def _arrange_cabinet(state: WorldState, spec: TaskSpec) -> dict[str, Assignment]:
    assignments: dict[str, Assignment] = {}
    ((obj, goal_cell),) = spec.goal_cells.items()
    goal_name = next(name for name, cell in spec.landmarks.items() if cell == goal_cell)
    start_cell = state.free_objects.get(obj)
    carriers = [
        name
        for name in spec.roster
        if _reaches(spec, name, goal_cell)
        and (start_cell is None or _reaches(spec, name, start_cell))
    ]
    holder = state.holder_of(obj)
    carrier = holder or carriers[-1]

    if not state.door_open:
        for handle in spec.handles:
            cell = spec.landmarks[handle]
            for name in spec.roster:
                if name == carrier or name in assignments or not _reaches(spec, name, cell):
                    continue
                assignments[name] = Assignment(Verb.OPEN, cell, target=handle)
                break
        return assignments
    if holder is not None:
        assignments[holder] = Assignment(Verb.PLACE, goal_cell, obj, goal_name)
    elif start_cell is not None and start_cell != goal_cell:
        assignments[carrier] = Assignment(Verb.PICK, start_cell, obj)
    return assignments


def _sweep_floor(state: WorldState, spec: TaskSpec) -> dict[str, Assignment]:
    sweeper = state.holder_of(spec.broom)
    catcher = state.holder_of(spec.dustpan)
    pending = [obj for obj in spec.trash if obj in state.free_objects]
    if pending:
        obj = pending[0]
        cell = state.free_objects[obj]
        for dx, dy, dz in SWEEP_DIRECTIONS:
            broom_cell = cell.offset(-dx, -dy, -dz)
            pan_cell = cell.offset(dx, dy, dz)
            if (
                spec.dims.contains(broom_cell)
                and spec.dims.contains(pan_cell)
                and _reaches(spec, sweeper, broom_cell)
                and _reaches(spec, catcher, pan_cell)
            ):
                return {
                    sweeper: Assignment(Verb.SWEEP, broom_cell, obj),
                    catcher: Assignment(Verb.MOVE, pan_cell),
                }
        raise OraclePlanningError(f"{obj} at {cell} cannot be swept")
    if state.dustpan_contents:
        return {catcher: Assignment(Verb.DUMP, spec.bin_cell)}
    return {}


def _make_sandwich(state: WorldState, spec: TaskSpec) -> dict[str, Assignment]:
    board = spec.stack_cell
    board_name = next(name for name, cell in spec.landmarks.items() if cell == board)
    pending = list(spec.recipe[len(state.stack or ()) :])
    assignments: dict[str, Assignment] = {}
    claimed: set[str] = set()
    for name in spec.roster:
        held = state.robot(name).held
        if pending and held == pending[0]:
            assignments[name] = Assignment(Verb.PLACE, board, held, board_name)
            claimed.add(held)
        elif held is not None:
            assignments[name] = Assignment(Verb.WAIT, state.robot(name).effector)
            claimed.add(held)
    for name in spec.roster:
        if name in assignments:
            continue
        for index, item in enumerate(pending[:2]):
            cell = state.free_objects.get(item)
            if cell is None or item in claimed or not _reaches(spec, name, cell, board):
                continue
            if index == 1 and pending[0] not in claimed:
                continue
            assignments[name] = Assignment(Verb.PICK, cell, item)
            claimed.add(item)
            break
    return assignments


def _move_rope(state: WorldState, spec: TaskSpec) -> dict[str, Assignment]:
    rope = spec.rope
    ends = (rope.left, rope.right)
    holders = [state.holder_of(end) for end in ends]
    if all(holder is None for holder in holders):
        assignments: dict[str, Assignment] = {}
        for end in ends:
            cell = state.free_objects[end]
            for name in spec.roster:
                if name not in assignments and _reaches(spec, name, cell):
                    assignments[name] = Assignment(Verb.PICK, cell, end)
                    break
        return assignments
    if any(holder is None for holder in holders):
        raise OraclePlanningError("only one rope end is held")
    left_goal = min(
        cell for cell in rope.tray_cells if cell.offset(*rope.orientation) in rope.tray_cells
    )
    right_goal = left_goal.offset(*rope.orientation)
    return {
        holders[0]: Assignment(Verb.PLACE, left_goal, rope.left, left_goal),
        holders[1]: Assignment(Verb.PLACE, right_goal, rope.right, right_goal),
    }


_POLICIES: dict[str, Callable[[WorldState, TaskSpec], dict[str, Assignment]]] = {
    "sort_cubes": _sort_cubes,
    "arrange_cabinet": _arrange_cabinet,
    "sweep_floor": _sweep_floor,
    "make_sandwich": _make_sandwich,
    "move_rope": _move_rope,
}
