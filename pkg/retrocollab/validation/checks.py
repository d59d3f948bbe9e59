from __future__ import annotations

import logging
from itertools import combinations

from retrocollab.actions.plan import ActionPlan, AgentAction, Verb
from retrocollab.world.geometry import GridCell
from retrocollab.world.simulator import rope_violations
from retrocollab.world.state import WorldState
from retrocollab.world.tasks import TaskSpec

from .findings import Finding, ValidationReport

logger = logging.getLogger(__name__)

__all__ = ["check_collisions", "check_reachability", "check_subgoals", "occupancy", "validate"]


def validate(plan: ActionPlan, state: WorldState, spec: TaskSpec) -> ValidationReport:
    """Run reachability, collision and subgoal checks and render the combined feedback."""

    findings = check_reachability(plan, state, spec)
    findings += check_collisions(plan, state)
    findings += check_subgoals(plan, state, spec)
    report = ValidationReport.from_findings(findings)
    logger.debug(
        "validate %s t=%s -> ok=%s findings=%d", spec.task_id, state.t, report.ok, len(findings)
    )
    return report


def check_reachability(plan: ActionPlan, state: WorldState, spec: TaskSpec) -> list[Finding]:
    findings: list[Finding] = []
    for action in plan.actions:
        if action.agent not in spec.roster:
            findings.append(
                _finding(action.agent, 0, "ik_failure", "the agent is not in this task")
            )
            continue
        reach = spec.robot_spec(action.agent).envelope
        effector = state.robot(action.agent).effector
        path = action.path
        if path and path[0] != effector:
            findings.append(
                _finding(
                    action.agent,
                    0,
                    "ik_failure",
                    f"the path starts at {path[0]} but the effector is at {effector}",
                )
            )
        for step, cell in enumerate(path):
            if not spec.dims.contains(cell) or not reach.contains(cell):
                findings.append(
                    _finding(action.agent, step, "ik_failure", f"{cell} is outside its reach")
                )
            if step and path[step - 1].l1(cell) > 1:
                findings.append(
                    _finding(
                        action.agent,
                        step,
                        "ik_failure",
                        f"{path[step - 1]} to {cell} is more than one cell",
                    )
                )
    return findings


def occupancy(plan: ActionPlan, state: WorldState) -> dict[str, list[GridCell]]:
    """Cell of every robot at every micro-step; short paths hold their last cell."""

    horizon = plan.horizon
    table: dict[str, list[GridCell]] = {}
    for name in sorted(state.robots):
        action = plan.action_for(name)
        effector = state.robots[name].effector
        if action is None:
            table[name] = [effector] * horizon
        else:
            table[name] = [action.position_at(effector, step) for step in range(horizon)]
    return table


def check_collisions(plan: ActionPlan, state: WorldState) -> list[Finding]:
    """Vertex and swap conflicts between every pair of robots in lockstep time."""

    table = occupancy(plan, state)
    findings: list[Finding] = []
    for a, b in combinations(sorted(table), 2):
        path_a, path_b = table[a], table[b]
        for step in range(plan.horizon):
            if path_a[step] == path_b[step]:
                findings += _pair(a, b, step, "collision")
            elif (
                step
                and path_a[step] == path_b[step - 1]
                and path_b[step] == path_a[step - 1]
            ):
                findings += _pair(a, b, step, "swap_collision")
    return findings


def check_subgoals(plan: ActionPlan, state: WorldState, spec: TaskSpec) -> list[Finding]:
    findings: list[Finding] = []
    for name in spec.roster:
        if plan.action_for(name) is None:
            findings.append(_finding(name, 0, "subgoal_infeasible", "it has no action"))

    actions = [plan.action_for(name) for name in spec.roster if plan.action_for(name)]
    finals = {a.agent: a.final_cell(state.robot(a.agent).effector) for a in actions}
    claimed: set[str] = set()
    placed: set[GridCell] = set()
    stacked = len(state.stack or ())
    openers: dict[str, str] = {}

    for action in actions:
        name = action.agent
        step = max(len(action.path) - 1, 0)
        held = state.robot(name).held

        def infeasible(detail: str, *, _name: str = name, _step: int = step) -> None:
            findings.append(_finding(_name, _step, "subgoal_infeasible", detail))

        if action.object is not None and action.verb is not Verb.WAIT:
            if action.object in claimed:
                infeasible(f"{action.object} is already used by another agent in this plan")
            claimed.add(action.object)

        if action.verb is Verb.PICK:
            _check_pick(action, state, spec, finals[name], held, infeasible)
        elif action.verb is Verb.PLACE:
            stacked, placed_cell = _check_place(
                action, state, spec, finals[name], held, stacked, placed, infeasible
            )
            if placed_cell is not None:
                placed.add(placed_cell)
        elif action.verb is Verb.SWEEP:
            _check_sweep(action, state, spec, finals, held, infeasible)
        elif action.verb is Verb.DUMP:
            if spec.dustpan is None or held != spec.dustpan:
                infeasible("DUMP needs the dustpan in hand")
            elif finals[name] != spec.bin_cell:
                infeasible(f"DUMP must end on the bin at {spec.bin_cell}")
        elif action.verb is Verb.OPEN:
            handle = action.target
            if spec.handles is None or not isinstance(handle, str) or handle not in spec.handles:
                infeasible(f"{handle} is not a door handle")
            elif finals[name] != spec.landmarks[handle]:
                infeasible(f"OPEN must end on {handle} at {spec.landmarks[handle]}")
            elif state.door_open:
                infeasible("the door is already open")
            else:
                openers[name] = handle

    if openers and set(openers.values()) != set(spec.handles or ()):
        missing = sorted(set(spec.handles or ()) - set(openers.values()))
        for name in openers:
            action = plan.action_for(name)
            findings.append(
                _finding(
                    name,
                    max(len(action.path) - 1, 0),
                    "joint_action_incomplete",
                    f"OPEN needs another agent at {', '.join(missing)} in the same step",
                )
            )

    for violation in rope_violations(plan, state, spec):
        findings.append(
            _finding(violation.agent, violation.micro_step, "rope_constraint", violation.detail)
        )
    return findings


def _check_pick(action, state, spec, final, held, infeasible) -> None:
    obj = action.object
    if held is not None:
        infeasible(f"the hand already holds {held}")
    if obj not in state.free_objects:
        infeasible(f"{obj} is not lying free on the table")
    elif state.free_objects[obj] != final:
        infeasible(f"{obj} is at {state.free_objects[obj]}, the path ends at {final}")
    if obj in spec.behind_door and not state.door_open:
        infeasible(f"{obj} is behind the closed door")


def _check_place(
    action: AgentAction,
    state: WorldState,
    spec: TaskSpec,
    final: GridCell,
    held: str | None,
    stacked: int,
    placed: set[GridCell],
    infeasible,
) -> tuple[int, GridCell | None]:
    obj = action.object
    target = spec.resolve_target(action.target)
    ok = True
    if held != obj:
        infeasible(f"it is not holding {obj}")
        ok = False
    if target is None:
        infeasible(f"{action.target} is not a known place")
        return stacked, None
    if final != target:
        infeasible(f"PLACE must end on {target}, the path ends at {final}")
        ok = False
    if target.z != 0 or not spec.dims.contains(target):
        infeasible(f"{target} is not on the table")
        ok = False
    if target == spec.stack_cell:
        recipe = spec.recipe or ()
        expected = recipe[stacked] if stacked < len(recipe) else None
        if obj != expected:
            wanted = expected or "nothing more"
            infeasible(f"the recipe expects {wanted} next, not {obj}")
            ok = False
        return (stacked + 1 if ok else stacked), None
    if target in state.free_objects.values() or target in placed:
        infeasible(f"{target} is already occupied")
        ok = False
    return stacked, (target if ok else None)


def _check_sweep(action, state, spec, finals, held, infeasible) -> None:
    obj = action.object
    if spec.broom is None or held != spec.broom:
        infeasible("SWEEP needs the broom in hand")
        return
    if obj not in state.free_objects:
        infeasible(f"{obj} is not lying free on the table")
        return
    obj_cell = state.free_objects[obj]
    broom_cell = finals[action.agent]
    if not broom_cell.is_adjacent(obj_cell):
        infeasible(f"the broom must end next to {obj} at {obj_cell}")
        return
    landing = obj_cell.offset(*broom_cell.delta(obj_cell))
    lined_up = any(
        state.robots[name].held == spec.dustpan and cell == landing
        for name, cell in finals.items()
        if name != action.agent
    )
    if not lined_up:
        infeasible(f"the dustpan must end at {landing}, opposite the broom")


def _pair(a: str, b: str, step: int, kind: str) -> list[Finding]:
    return [_finding(a, step, kind, other=b), _finding(b, step, kind, other=a)]


def _finding(
    agent: str, step: int, kind: str, detail: str = "", *, other: str | None = None
) -> Finding:
    return Finding(agent=agent, micro_step=step, kind=kind, detail=detail, other=other)
