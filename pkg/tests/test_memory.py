from __future__ import annotations

import pytest
from pydantic import ValidationError

from retrocollab.memory import (
    AGENT_SECTIONS,
    CRITIC_INSTRUCTION,
    PROPOSER_INSTRUCTION,
    LongTermMemory,
    MemoryOrderError,
    PromptTemplates,
    RoundRecord,
    TemplateNotFoundError,
    TranscriptTurn,
    commit_round,
    construct_prompt,
)
from retrocollab.validation.findings import Finding, ValidationReport
from retrocollab.world import TASK_IDS, observe


def _record(index: int, **fields) -> RoundRecord:
    return RoundRecord(
        round_index=index,
        step=index,
        transcript=[TranscriptTurn(agent="Alice", message=f"msg-round-{index}")],
        **fields,
    )


def _rejected(index: int) -> RoundRecord:
    finding = Finding(agent="Alice", micro_step=1, kind="collision", other="Bob")
    return _record(index, validation=ValidationReport.from_findings([finding]))


def _discussion_prompt(task, memory, templates, agent="Alice"):
    spec, state = task("sort_cubes")
    return construct_prompt(
        observe(state, spec, agent),
        spec.goal,
        memory,
        "agent_discussion",
        spec,
        agent,
        templates=templates,
    )


@pytest.mark.parametrize(("capacity", "kept"), [(2, [1, 2]), (1, [2]), (3, [0, 1, 2])])
def test_commit_keeps_the_most_recent_rounds(capacity, kept):
    memory = LongTermMemory(capacity=capacity)
    for index in range(3):
        memory = commit_round(memory, _record(index))
    assert memory.round_indices() == kept


@pytest.mark.parametrize(("capacity", "kept"), [(2, [1, 2]), (1, [2])])
def test_only_kept_rounds_reach_the_prompt(task, templates, capacity, kept):
    memory = LongTermMemory(capacity=capacity)
    for index in range(3):
        memory = commit_round(memory, _record(index))

    history = _discussion_prompt(task, memory, templates).section("round history")
    for index in range(3):
        assert (f"msg-round-{index}" in history) is (index in kept)
    positions = [history.index(f"Round {index}") for index in kept]
    assert positions == sorted(positions)


def test_commit_rejects_out_of_order_rounds():
    memory = commit_round(LongTermMemory(), _record(3))
    with pytest.raises(MemoryOrderError):
        commit_round(memory, _record(3))
    with pytest.raises(MemoryOrderError):
        commit_round(memory, _record(1))


def test_commit_does_not_mutate_the_input():
    memory = LongTermMemory(capacity=1)
    commit_round(memory, _record(0))
    assert memory.records == []


def test_critique_and_proposal_come_together():
    with pytest.raises(ValidationError):
        _record(0, critique="too close to Bob")
    record = _record(0, critique="too close to Bob", proposal="Alice waits")
    assert "[Critique]\ntoo close to Bob" in record.render()


def test_empty_memory_renders_the_none_sentinel(task, templates):
    prompt = _discussion_prompt(task, LongTermMemory(), templates)

    assert [name for name, _ in prompt.sections] == list(AGENT_SECTIONS)
    assert prompt.section("round history") == "none"
    assert prompt.section("feedback") == "none"
    assert prompt.rendered.startswith("## Task context\n")


def test_feedback_section_shows_the_latest_rejection(task, templates):
    memory = commit_round(LongTermMemory(), _rejected(0))
    feedback = _discussion_prompt(task, memory, templates).section("feedback")
    assert feedback == (
        "Validation: The path for Agent Alice collides with Agent Bob at step 1; adjust the path."
    )


def test_agent_prompt_carries_capability_and_observation(task, templates):
    prompt = _discussion_prompt(task, LongTermMemory(), templates, agent="Chad")
    assert "Chad" in prompt.section("agent capability")
    assert "(3,0,0)-(7,5,3)" in prompt.section("agent capability")
    assert prompt.section("observation").startswith("Chad effector @ (6,0,2)")


def test_critic_prompt_reads_the_current_round(task, templates):
    spec, _ = task("sort_cubes")
    prompt = construct_prompt(
        None,
        spec.goal,
        LongTermMemory(),
        "critic",
        spec,
        short_term=_rejected(4),
        templates=templates,
    )
    assert [name for name, _ in prompt.sections] == [
        "task context",
        "round history",
        "current round",
        "instruction",
    ]
    assert "msg-round-4" in prompt.section("current round")
    assert "collides with Agent Bob" in prompt.section("current round")
    assert CRITIC_INSTRUCTION in prompt.section("instruction")


def test_proposer_prompt_carries_the_critique_verbatim(task, templates):
    spec, _ = task("sort_cubes")
    critique = "The path for Agent Alice passes (2,0,2) while Bob is there."
    prompt = construct_prompt(
        None,
        spec.goal,
        LongTermMemory(),
        "proposer",
        spec,
        short_term=_rejected(0),
        critique=critique,
        templates=templates,
    )
    assert prompt.section("critique") == critique
    assert PROPOSER_INSTRUCTION in prompt.section("instruction")


def test_role_prompts_need_their_inputs(task, templates):
    spec, _ = task("sort_cubes")
    with pytest.raises(ValueError):
        construct_prompt(None, spec.goal, LongTermMemory(), "critic", spec, templates=templates)
    with pytest.raises(ValueError):
        construct_prompt(
            None, spec.goal, LongTermMemory(), "agent_discussion", spec, "Alice",
            templates=templates,
        )


def test_missing_templates_are_reported(tmp_path):
    with pytest.raises(TemplateNotFoundError):
        PromptTemplates(tmp_path).check("sort_cubes")


def test_every_task_has_its_templates(templates):
    for task_id in TASK_IDS:
        templates.check(task_id)
