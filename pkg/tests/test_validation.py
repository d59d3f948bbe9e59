from __future__ import annotations

import itertools
import random

from retrocollab.actions.plan import ActionPlan, AgentAction, Verb, wait_plan
from retrocollab.bench.oracle import next_plan
from retrocollab.validation import ValidationReport, check_collisions, validate
from retrocollab.world import (
    TASK_IDS,
    GridCell,
    GridDims,
    RobotState,
    WorldState,
    apply_plan,
    is_success,
    load_task,
)

SMALL = GridDims(4, 4, 3)
_VERBS = (Verb.WAIT, Verb.MOVE, Verb.MOVE, Verb.PICK, Verb.PLACE, Verb.SWEEP, Verb.DUMP, Verb.OPEN)


def _walk(rng, start, length, inside) -> tuple[GridCell, ...]:
    path = [start]
    for _ in range(length - 1):
        options = [cell for cell in path[-1].neighbors() if inside(cell)] + [path[-1]]
        path.append(rng.choice(options))
    return tuple(path)


def _brute_force_conflicts(starts, paths, horizon) -> set[tuple[str, str, int, str]]:
    """Occupancy grid per micro-step; vertex conflicts first, swaps only where none."""

    def cell(name, t):
        path = paths[name]
        return starts[name] if not path else path[min(t, len(path) - 1)]

    found = set()
    for t in range(horizon):
        grid: dict[tuple[int, int, int], list[str]] = {}
        for name in starts:
            c = cell(name, t)
            grid.setdefault((c.x, c.y, c.z), []).append(name)
        vertex = set()
        for names in grid.values():
            for a, b in itertools.permutations(names, 2):
                found.add((a, b, t, "collision"))
                vertex.add((a, b))
        if t == 0:
            continue
        for a, b in itertools.permutations(starts, 2):
            crossed = cell(a, t) == cell(b, t - 1) and cell(b, t) == cell(a, t - 1)
            if crossed and (a, b) not in vertex:
                found.add((a, b, t, "swap_collision"))
    return found


def test_collision_check_matches_brute_force():
    rng = random.Random(7)
    all_cells = [
        GridCell(x, y, z) for x in range(SMALL.x) for y in range(SMALL.y) for z in range(SMALL.z)
    ]
    colliding = 0
    for _ in range(1500):
        names = ["A", "B", "C", "D"][: rng.randint(2, 4)]
        starts = dict(zip(names, rng.sample(all_cells, len(names)), strict=True))
        paths = {
            name: _walk(rng, starts[name], rng.randint(1, 6), SMALL.contains)
            if rng.random() < 0.9
            else ()
            for name in names
        }
        state = WorldState(
            task_id="grid",
            t=0,
            robots={name: RobotState(name, starts[name]) for name in names},
            object_names=(),
            free_objects={},
        )
        plan = ActionPlan(
            tuple(
                AgentAction(name, Verb.MOVE if paths[name] else Verb.WAIT, path=paths[name])
                for name in names
            )
        )

        expected = _brute_force_conflicts(starts, paths, plan.horizon)
        actual = {(f.agent, f.other, f.micro_step, f.kind) for f in check_collisions(plan, state)}
        assert actual == expected
        colliding += bool(expected)
    assert colliding > 100


def test_collision_feedback_names_both_agents(task):
    spec, state = task("sort_cubes")
    plan = ActionPlan(
        (
            AgentAction("Alice", Verb.MOVE, path=(GridCell(1, 0, 2), GridCell(2, 0, 2))),
            AgentAction("Bob", Verb.MOVE, path=(GridCell(3, 0, 2), GridCell(2, 0, 2))),
            AgentAction("Chad", Verb.WAIT),
        )
    )
    report = validate(plan, state, spec)
    assert not report.ok
    assert report.feedback_text.splitlines() == [
        "The path for Agent Alice collides with Agent Bob at step 1; adjust the path.",
        "The path for Agent Bob collides with Agent Alice at step 1; adjust the path.",
    ]


def test_swap_is_reported_once_per_agent(task):
    spec, state = task("move_rope")
    state = state.evolve(
        robots={
            "Alice": RobotState("Alice", GridCell(3, 0, 2)),
            "Bob": RobotState("Bob", GridCell(4, 0, 2)),
        }
    )
    plan = ActionPlan(
        (
            AgentAction("Alice", Verb.MOVE, path=(GridCell(3, 0, 2), GridCell(4, 0, 2))),
            AgentAction("Bob", Verb.MOVE, path=(GridCell(4, 0, 2), GridCell(3, 0, 2))),
        )
    )
    report = validate(plan, state, spec)
    assert sorted((f.agent, f.kind) for f in report.findings) == [
        ("Alice", "swap_collision"),
        ("Bob", "swap_collision"),
    ]


def test_unreachable_paths_are_ik_failures(task):
    spec, state = task("sort_cubes")
    plan = ActionPlan(
        (
            AgentAction(
                "Alice",
                Verb.MOVE,
                path=(GridCell(1, 0, 2), GridCell(0, 0, 2), GridCell(-1, 0, 2)),
            ),
            AgentAction("Bob", Verb.MOVE, path=(GridCell(2, 2, 2), GridCell(2, 2, 1))),
            AgentAction("Chad", Verb.WAIT),
        )
    )
    report = validate(plan, state, spec)
    found = {(f.agent, f.micro_step, f.kind) for f in report.findings}
    assert ("Alice", 2, "ik_failure") in found
    assert ("Bob", 0, "ik_failure") in found
    assert "keep the path inside its reach" in report.feedback_text


def test_subgoal_problems_are_reported(task):
    spec, state = task("make_sandwich")
    plan = ActionPlan(
        (
            AgentAction("Chad", Verb.PLACE, object="cheese", target="cutting_board"),
            AgentAction("Dave", Verb.SWEEP, object="tomato"),
        )
    )
    report = validate(plan, state, spec)
    details = [f.detail for f in report.findings if f.kind == "subgoal_infeasible"]
    assert "it is not holding cheese" in details
    assert "SWEEP needs the broom in hand" in details


def test_missing_agent_is_infeasible(task):
    spec, state = task("sort_cubes")
    plan = ActionPlan((AgentAction("Alice", Verb.WAIT), AgentAction("Bob", Verb.WAIT)))
    report = validate(plan, state, spec)
    assert [(f.agent, f.micro_step, f.kind) for f in report.findings] == [
        ("Chad", 0, "subgoal_infeasible")
    ]
    horizon = max((len(a.path) for a in plan.actions), default=0)
    assert all(f.micro_step < max(horizon, 1) for f in report.findings)


def test_empty_findings_make_an_accepted_report(task):
    report = ValidationReport.from_findings([])
    assert report.ok
    assert report.feedback_text == ""
    spec, state = task("sort_cubes")
    assert validate(wait_plan(spec.roster), state, spec).ok


def _samples():
    samples = []
    for task_id in TASK_IDS:
        for seed in range(2):
            spec, state = load_task(task_id, seed)
            while not is_success(state, spec):
                plan = next_plan(state, spec)
                samples.append((spec, state, plan))
                state, _ = apply_plan(state, spec, plan)
    return samples


def _random_plan(rng, spec, state, guide: ActionPlan) -> ActionPlan:
    actions = []
    nouns = list(state.object_names) + list(spec.landmarks)
    for name in spec.roster:
        if rng.random() < 0.5:
            actions.append(guide.action_for(name))
            continue
        reach = spec.robot_spec(name).envelope
        path = _walk(
            rng,
            state.robot(name).effector,
            rng.randint(1, 5),
            lambda cell, reach=reach: spec.dims.contains(cell) and reach.contains(cell),
        )
        verb = rng.choice(_VERBS)
        if verb is Verb.WAIT:
            actions.append(AgentAction(name, verb))
        elif verb in (Verb.MOVE, Verb.DUMP):
            actions.append(AgentAction(name, verb, path=path))
        elif verb is Verb.OPEN:
            actions.append(AgentAction(name, verb, target=rng.choice(nouns), path=path))
        elif verb is Verb.PLACE:
            target = rng.choice([rng.choice(nouns), path[-1]])
            actions.append(
                AgentAction(name, verb, object=rng.choice(nouns), target=target, path=path)
            )
        else:
            actions.append(AgentAction(name, verb, object=rng.choice(nouns), path=path))
    return ActionPlan(tuple(actions))


def test_validated_plans_always_execute():
    rng = random.Random(2024)
    samples = _samples()
    executed = draws = 0
    while executed < 10_000:
        draws += 1
        assert draws <= 100_000, f"only {executed} of {draws} random plans passed validation"
        spec, state, guide = rng.choice(samples)
        plan = _random_plan(rng, spec, state, guide)
        if not validate(plan, state, spec).ok:
            continue
        new_state, feedback = apply_plan(state, spec, plan)
        assert new_state.t == state.t + 1
        assert new_state.conservation_violations() == []
        assert feedback.startswith(f"Step {new_state.t}:")
        executed += 1
