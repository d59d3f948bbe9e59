from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import httpx
from pydantic import BaseModel, ConfigDict, Field, field_validator

from retrocollab.config import Config
from retrocollab.dialogue.metrics import TaskMetrics, compute_metrics
from retrocollab.dialogue.runtime import run_episode
from retrocollab.dialogue.schemas import EpisodeConfig, EpisodeResult
from retrocollab.llm.schemas import BackendConfig
from retrocollab.models import record_run
from retrocollab.world.tasks import TASK_IDS

from .report import write_summary

logger = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "run_experiment"]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    tasks: list[str] = Field(default_factory=lambda: list(TASK_IDS))
    episodes_per_task: int = Field(15, ge=1)
    base_seed: int = Field(0, ge=0, description="Episode i runs with seed base_seed + i")
    memory_capacity: int = Field(Config.MEMORY_CAPACITY, ge=1)
    max_discussion_turns: int = Field(6, ge=1)
    max_replans_per_step: int = Field(3, ge=1)
    max_steps: int | None = Field(None, ge=1)
    retrospection: bool = True
    max_prompt_chars: int = Field(Config.MAX_PROMPT_CHARS, ge=1)
    llm1: BackendConfig = Field(default_factory=BackendConfig.default_llm1)
    llm2: BackendConfig = Field(default_factory=BackendConfig.default_llm2)
    out_dir: Path = Field(Path(Config.RESULTS_DIR), description="Where artifacts are written")
    parallelism: int = Field(Config.BENCH_PARALLELISM, ge=1, description="Concurrent episodes")
    label: str | None = Field(None, description="Ablation arm, e.g. 'memory-1' or 'llm1-8b'")

    @field_validator("tasks")
    @classmethod
    def _known_tasks(cls, value: list[str]) -> list[str]:
        unknown = [task for task in value if task not in TASK_IDS]
        if unknown:
            raise ValueError(f"unknown tasks: {', '.join(unknown)}")
        if not value or len(set(value)) != len(value):
            raise ValueError("tasks must be a non-empty list without repeats")
        return value

    def episode_configs(self, task_id: str) -> list[EpisodeConfig]:
        return [
            EpisodeConfig(
                task_id=task_id,
                seed=self.base_seed + index,
                memory_capacity=self.memory_capacity,
                max_discussion_turns=self.max_discussion_turns,
                max_replans_per_step=self.max_replans_per_step,
                max_steps=self.max_steps,
                retrospection=self.retrospection,
                max_prompt_chars=self.max_prompt_chars,
                llm1=self.llm1,
                llm2=self.llm2,
            )
            for index in range(self.episodes_per_task)
        ]


def run_experiment(
    config: ExperimentConfig, *, http_client: httpx.Client | None = None
) -> list[TaskMetrics]:
    """Run every episode of the experiment and write transcripts, results and the summary."""

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [episode for task in config.tasks for episode in config.episode_configs(task)]
    logger.info(
        "experiment %s: %d episodes, parallelism %d", config.label, len(jobs), config.parallelism
    )

    with ThreadPoolExecutor(max_workers=config.parallelism) as executor:
        futures = [
            executor.submit(_run_one, episode, out_dir, http_client) for episode in jobs
        ]
        results = [future.result() for future in futures]

    metrics: list[TaskMetrics] = []
    for task in config.tasks:
        task_results = sorted(
            (result for result in results if result.task_id == task), key=lambda r: r.seed
        )
        _write_results(out_dir / f"results_{task}.json", task_results, out_dir)
        metrics.append(compute_metrics(task_results, label=config.label))

    write_summary(metrics, out_dir)
    record_run(
        out_dir / "results.db",
        results,
        label=config.label,
        config_json=config.model_dump_json(exclude={"out_dir"}),
    )
    return metrics


def _run_one(
    episode: EpisodeConfig, out_dir: Path, http_client: httpx.Client | None
) -> EpisodeResult:
    transcript = out_dir / "transcripts" / f"{episode.episode_id}.jsonl"
    try:
        return run_episode(episode, transcript_path=transcript, http_client=http_client)
    except Exception:
        logger.exception("episode %s crashed", episode.episode_id)
        return EpisodeResult(
            episode_id=episode.episode_id,
            task_id=episode.task_id,
            seed=episode.seed,
            success=False,
            steps=0,
            replans=0,
            failure_reason="internal_error",
            config_fingerprint=episode.fingerprint,
            transcript_path=transcript,
        )


def _write_results(path: Path, results: list[EpisodeResult], out_dir: Path) -> None:
    rows = []
    for result in results:
        row = result.outcome()
        if result.transcript_path is not None:
            transcript = Path(result.transcript_path)
            row["transcript"] = (
                transcript.relative_to(out_dir).as_posix()
                if transcript.is_relative_to(out_dir)
                else transcript.as_posix()
            )
        rows.append(row)
    path.write_text(json.dumps(rows, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
