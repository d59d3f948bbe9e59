from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import click
from pydantic import ValidationError

from retrocollab.config import Config
from retrocollab.llm.schemas import BackendConfig, ScriptFile
from retrocollab.models import load_ledger_metrics

from .experiment import ExperimentConfig, run_experiment
from .oracle import oracle_script
from .replay import replay_episode
from .report import load_results_metrics, render_table


@click.group()
@click.option("--log-level", default=Config.LOG_LEVEL, show_default=True, help="Root log level.")
def cli(log_level: str) -> None:
    """Multi-robot dialogue experiments with retrospective critique."""

    logging.basicConfig(
        level=log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


@cli.command()
@click.option("--tasks", help="Comma-separated task ids (default: all five).")
@click.option("--episodes", type=int, help="Episodes per task.")
@click.option("--seed", type=int, help="Base seed; episode i uses seed + i.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--parallelism", type=int, help="Concurrent episodes.")
@click.option("--label", help="Ablation arm name stored in the ledger.")
@click.option("--memory-capacity", type=int, help="Rounds kept in long-term memory.")
@click.option("--no-retrospection", is_flag=True, help="Skip the critic and proposer.")
@click.option("--oracle", is_flag=True, help="Use the built-in planner instead of model servers.")
@click.option("--llm1-model", help="Model name for agent discussion.")
@click.option("--llm2-model", help="Model name for critique and proposals.")
def run(
    tasks: str | None,
    episodes: int | None,
    seed: int | None,
    config_path: str | None,
    out: str | None,
    parallelism: int | None,
    label: str | None,
    memory_capacity: int | None,
    no_retrospection: bool,
    oracle: bool,
    llm1_model: str | None,
    llm2_model: str | None,
) -> None:
    """Run a batch of episodes and print the summary table."""

    data: dict[str, Any] = {}
    if config_path:
        data = json.loads(Path(config_path).read_text(encoding="utf-8"))
    overrides = {
        "tasks": [task.strip() for task in tasks.split(",") if task.strip()] if tasks else None,
        "episodes_per_task": episodes,
        "base_seed": seed,
        "out_dir": out,
        "parallelism": parallelism,
        "label": label,
        "memory_capacity": memory_capacity,
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    if no_retrospection:
        data["retrospection"] = False
    if oracle:
        data["llm1"] = {"kind": "oracle", "backend_id": "oracle-planner"}
        data["llm2"] = {"kind": "oracle", "backend_id": "local-critic"}
    for key, model in (("llm1", llm1_model), ("llm2", llm2_model)):
        if model:
            base = data.get(key) or getattr(BackendConfig, f"default_{key}")().model_dump()
            data[key] = {**base, "kind": "http", "model_name": model}

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise click.BadParameter(str(exc)) from exc
    metrics = run_experiment(config)
    click.echo(render_table(metrics))


@cli.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--label", help="Only report this ablation arm.")
def report(in_dir: str, label: str | None) -> None:
    """Recompute the summary table from a results directory."""

    db_path = Path(in_dir) / "results.db"
    if db_path.is_file():
        metrics = load_ledger_metrics(db_path, label=label)
    else:
        metrics = load_results_metrics(in_dir)
    if not metrics:
        raise click.ClickException(f"no results found in {in_dir}")
    click.echo(render_table(metrics))


@cli.command()
@click.option("--transcript", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), help="Where to write the new transcript.")
def replay(transcript: str, out: str | None) -> None:
    """Re-run a recorded episode offline and print its result."""

    result = replay_episode(transcript, out)
    click.echo(json.dumps(result.outcome(), ensure_ascii=False, indent=2))


@cli.command("oracle")
@click.option("--task", "task_id", required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def oracle_command(task_id: str, seed: int, out: str) -> None:
    """Write the planner's solution as a script for the scripted backend."""

    script = ScriptFile(entries=oracle_script(task_id, seed))
    Path(out).write_text(script.model_dump_json(indent=2) + "\n", encoding="utf-8")
    click.echo(f"{len(script.entries)} steps written to {out}")


if __name__ == "__main__":  # pragma: no cover
    cli()
