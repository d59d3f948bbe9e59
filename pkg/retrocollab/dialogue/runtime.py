"""Episode loop as a LangGraph state machine.

discuss -> parse -> validate -> execute -> retrospect -> commit, with rejected plans jumping
straight to retrospect and commit deciding whether another round starts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cache
from pathlib import Path
from typing import Any

import httpx
from langchain_core.language_models.chat_models import BaseChatModel
from langgraph.graph import END, START, StateGraph
from langgraph.runtime import Runtime

from retrocollab.actions.errors import PlanParseError
from retrocollab.actions.parser import parse_plan
from retrocollab.config import Config
from retrocollab.llm.backends import build_chat_model
from retrocollab.llm.errors import BackendError, PromptTooLongError
from retrocollab.llm.schemas import BackendScope
from retrocollab.memory.prompting import PromptTemplates
from retrocollab.memory.records import LongTermMemory, RoundRecord, commit_round
from retrocollab.validation.checks import validate
from retrocollab.world.simulator import apply_plan, is_success
from retrocollab.world.tasks import load_task

from .discussion import retrospect, run_discussion
from .schemas import EpisodeConfig, EpisodeResult
from .state import EpisodeContext, EpisodeState
from .transcript import TranscriptRecorder

logger = logging.getLogger(__name__)

__all__ = ["EpisodeBackends", "build_backends", "build_episode_graph", "run_episode"]

_NODES_PER_ROUND = 6


@dataclass(frozen=True, slots=True)
class EpisodeBackends:
    llm1: BaseChatModel
    llm2: BaseChatModel


def build_backends(
    config: EpisodeConfig, *, http_client: httpx.Client | None = None
) -> EpisodeBackends:
    def scope(channel: str) -> BackendScope:
        return BackendScope(channel=channel, task_id=config.task_id, seed=config.seed)

    return EpisodeBackends(
        llm1=build_chat_model(config.llm1, http_client=http_client, episode=scope("llm1")),
        llm2=build_chat_model(config.llm2, http_client=http_client, episode=scope("llm2")),
    )


def run_episode(
    config: EpisodeConfig,
    backends: EpisodeBackends | None = None,
    templates: PromptTemplates | None = None,
    *,
    transcript_path: Path | str | None = None,
    http_client: httpx.Client | None = None,
) -> EpisodeResult:
    """Play one episode to success or budget exhaustion and record its transcript."""

    spec, world = load_task(config.task_id, config.seed)
    templates = templates or PromptTemplates()
    templates.check(spec.task_id)
    backends = backends or build_backends(config, http_client=http_client)
    max_steps = config.max_steps or spec.max_steps
    episode_id = config.episode_id
    path = (
        Path(transcript_path)
        if transcript_path is not None
        else Path(Config.RESULTS_DIR) / "transcripts" / f"{episode_id}.jsonl"
    )

    with TranscriptRecorder(path, episode_id) as recorder:
        recorder.emit(
            "episode_start",
            config=config.fingerprint_payload(),
            config_fingerprint=config.fingerprint,
            roster=list(spec.roster),
            state=world.to_dict(),
        )
        context = EpisodeContext(
            config=config,
            spec=spec,
            llm1=backends.llm1,
            llm2=backends.llm2,
            recorder=recorder,
            templates=templates,
            max_steps=max_steps,
        )
        initial: EpisodeState = {
            "world": world,
            "memory": LongTermMemory(capacity=config.memory_capacity),
            "round_index": 0,
            "round_step": world.t,
            "steps": 0,
            "replans": 0,
            "step_replans": 0,
            "success": False,
            "failure_reason": None,
        }
        rounds_allowed = max_steps * (config.max_replans_per_step + 1)
        final = build_episode_graph().invoke(
            initial,
            context=context,
            config={"recursion_limit": _NODES_PER_ROUND * rounds_allowed + 10},
        )
        result = EpisodeResult(
            episode_id=episode_id,
            task_id=config.task_id,
            seed=config.seed,
            success=final.get("success", False),
            steps=final.get("steps", 0),
            replans=final.get("replans", 0),
            rounds=final.get("round_index", 0),
            failure_reason=final.get("failure_reason"),
            config_fingerprint=config.fingerprint,
            transcript_path=path,
        )
        recorder.emit("episode_end", **result.outcome())
    logger.info(
        "episode %s finished: success=%s steps=%s replans=%s reason=%s",
        episode_id,
        result.success,
        result.steps,
        result.replans,
        result.failure_reason,
    )
    return result


@cache
def build_episode_graph():
    builder = StateGraph(state_schema=EpisodeState, context_schema=EpisodeContext)
    builder.add_node("discuss", _discuss)
    builder.add_node("parse", _parse)
    builder.add_node("validate", _validate)
    builder.add_node("execute", _execute)
    builder.add_node("retrospect", _retrospect)
    builder.add_node("commit", _commit)
    builder.add_edge(START, "discuss")
    builder.add_conditional_edges(
        "discuss",
        lambda state: "stop" if state.get("failure_reason") else "parse",
        {"stop": END, "parse": "parse"},
    )
    builder.add_conditional_edges(
        "parse",
        lambda state: "validate" if state.get("plan") is not None else "rejected",
        {"validate": "validate", "rejected": "retrospect"},
    )
    builder.add_conditional_edges(
        "validate",
        lambda state: "execute" if state["validation"].ok else "rejected",
        {"execute": "execute", "rejected": "retrospect"},
    )
    builder.add_edge("execute", "retrospect")
    builder.add_conditional_edges(
        "retrospect",
        lambda state: "stop" if state.get("failure_reason") else "commit",
        {"stop": END, "commit": "commit"},
    )
    builder.add_conditional_edges(
        "commit",
        lambda state: "stop" if state.get("success") or state.get("failure_reason") else "next",
        {"stop": END, "next": "discuss"},
    )
    return builder.compile()


def _discuss(state: EpisodeState, runtime: Runtime[EpisodeContext]) -> dict[str, Any]:
    ctx = runtime.context
    world = state["world"]
    ctx.recorder.start_step(world.t)
    try:
        outcome = run_discussion(
            world,
            ctx.spec,
            state["memory"],
            ctx.llm1,
            ctx.config,
            templates=ctx.templates,
            recorder=ctx.recorder,
        )
    except (BackendError, PromptTooLongError) as exc:
        return _backend_failure(ctx, "llm1", exc)
    return {
        "round_step": world.t,
        "transcript": outcome.transcript,
        "plan_text": outcome.plan_text,
        "plan": None,
        "plan_error": None,
        "validation": None,
        "env_feedback": None,
        "record": None,
    }


def _parse(state: EpisodeState, runtime: Runtime[EpisodeContext]) -> dict[str, Any]:
    ctx = runtime.context
    text = state.get("plan_text")
    if text is None:
        turns = ctx.config.max_discussion_turns * len(ctx.spec.roster)
        error = f"The discussion ended after {turns} turns without an EXECUTE block."
        ctx.recorder.emit("plan", text=None, error={"kind": "no_agreement", "message": error})
        return {"plan_error": error}
    try:
        plan = parse_plan(text, ctx.spec.roster, ctx.spec.dims)
    except PlanParseError as exc:
        ctx.recorder.emit("plan", text=text, error=exc.to_dict())
        logger.info(
            "%s t=%s: plan rejected by the parser: %s", ctx.spec.task_id, state["world"].t, exc.kind
        )
        return {"plan_error": exc.render()}
    ctx.recorder.emit("plan", text=text, error=None)
    return {"plan": plan}


def _validate(state: EpisodeState, runtime: Runtime[EpisodeContext]) -> dict[str, Any]:
    ctx = runtime.context
    report = validate(state["plan"], state["world"], ctx.spec)
    ctx.recorder.emit(
        "validation",
        ok=report.ok,
        feedback=report.feedback_text,
        findings=[finding.model_dump(mode="json") for finding in report.findings],
    )
    return {"validation": report}


def _execute(state: EpisodeState, runtime: Runtime[EpisodeContext]) -> dict[str, Any]:
    ctx = runtime.context
    world, feedback = apply_plan(state["world"], ctx.spec, state["plan"])
    ctx.recorder.emit("env_step", feedback=feedback, state=world.to_dict())
    return {"world": world, "env_feedback": feedback, "steps": state["steps"] + 1}


def _retrospect(state: EpisodeState, runtime: Runtime[EpisodeContext]) -> dict[str, Any]:
    ctx = runtime.context
    record = RoundRecord(
        round_index=state["round_index"],
        step=state["round_step"],
        transcript=state["transcript"],
        validation=state.get("validation"),
        plan_error=state.get("plan_error"),
        env_feedback=state.get("env_feedback"),
    )
    if not ctx.config.retrospection:
        return {"record": record}
    try:
        critique, proposal = retrospect(
            record,
            ctx.llm2,
            ctx.config,
            ctx.spec,
            state["memory"],
            templates=ctx.templates,
            recorder=ctx.recorder,
        )
    except (BackendError, PromptTooLongError) as exc:
        return _backend_failure(ctx, "llm2", exc)
    ctx.recorder.emit("retrospection", critique=critique, proposal=proposal)
    return {"record": record.model_copy(update={"critique": critique, "proposal": proposal})}


def _commit(state: EpisodeState, runtime: Runtime[EpisodeContext]) -> dict[str, Any]:
    ctx = runtime.context
    record = state["record"]
    memory = commit_round(state["memory"], record)
    ctx.recorder.emit("round", record=record.model_dump(mode="json"))
    update: dict[str, Any] = {"memory": memory, "round_index": state["round_index"] + 1}

    if state.get("env_feedback") is not None:
        update["step_replans"] = 0
        if is_success(state["world"], ctx.spec):
            update["success"] = True
        elif state["steps"] >= ctx.max_steps:
            update["failure_reason"] = "step_budget"
        return update

    step_replans = state["step_replans"] + 1
    update.update(replans=state["replans"] + 1, step_replans=step_replans)
    if step_replans > ctx.config.max_replans_per_step:
        update["failure_reason"] = "replan_budget"
    return update


def _backend_failure(ctx: EpisodeContext, channel: str, exc: Exception) -> dict[str, Any]:
    notes = " ".join(getattr(exc, "__notes__", []))
    logger.warning("%s: %s failed: %s %s", ctx.spec.task_id, channel, exc, notes)
    ctx.recorder.emit("backend_error", backend=channel, detail=str(exc))
    return {"failure_reason": "backend_error", "success": False}

