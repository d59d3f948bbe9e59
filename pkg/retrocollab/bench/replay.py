from __future__ import annotations

import logging
from pathlib import Path

from retrocollab.dialogue.runtime import run_episode
from retrocollab.dialogue.schemas import EpisodeConfig, EpisodeResult
from retrocollab.dialogue.transcript import read_events
from retrocollab.llm.errors import ReplayMismatchError
from retrocollab.llm.schemas import BackendConfig

logger = logging.getLogger(__name__)

__all__ = ["replay_episode"]


def replay_episode(
    transcript_path: Path | str, out_path: Path | str | None = None
) -> EpisodeResult:
    """Re-run a recorded episode against its own completions; no model is contacted."""

    source = Path(transcript_path)
    target = Path(out_path) if out_path is not None else source.with_suffix(".replay.jsonl")
    if target.resolve() == source.resolve():
        raise ValueError("the replay transcript must not overwrite the recording")

    start = next((e for e in read_events(source) if e.get("event") == "episode_start"), None)
    if start is None:
        raise ReplayMismatchError(f"{source} has no episode_start event")
    recorded = start["config"]
    config = EpisodeConfig(
        task_id=recorded["task_id"],
        seed=recorded["seed"],
        memory_capacity=recorded["memory_capacity"],
        max_discussion_turns=recorded["max_discussion_turns"],
        max_replans_per_step=recorded["max_replans_per_step"],
        max_steps=recorded["max_steps"],
        retrospection=recorded["retrospection"],
        max_prompt_chars=recorded["max_prompt_chars"],
        llm1=BackendConfig(kind="replay", replay_path=source, backend_id=recorded["llm1"]),
        llm2=BackendConfig(kind="replay", replay_path=source, backend_id=recorded["llm2"]),
    )
    if config.fingerprint != start["config_fingerprint"]:
        raise ReplayMismatchError(
            f"{source}: configuration fingerprint does not match the recording"
        )
    logger.info("replaying %s into %s", source, target)
    return run_episode(config, transcript_path=target)
