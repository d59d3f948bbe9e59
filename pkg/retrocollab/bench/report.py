from __future__ import annotations

import csv
import json
from collections.abc import Sequence
from pathlib import Path

from retrocollab.dialogue.metrics import TaskMetrics, compute_metrics
from retrocollab.dialogue.schemas import EpisodeResult

__all__ = ["load_results_metrics", "render_row", "render_table", "write_summary"]

SUMMARY_COLUMNS = (
    "label",
    "task_id",
    "n",
    "success_rate",
    "success_se",
    "avg_steps",
    "avg_replans",
    "row",
)


def render_row(metrics: TaskMetrics) -> str:
    """``success±se, steps, replans``; steps read ``-`` when no episode succeeded."""

    steps = "-" if metrics.avg_steps is None else f"{metrics.avg_steps:.1f}"
    return (
        f"{metrics.success_rate:.2f}±{metrics.success_se:.2f}, {steps}, {metrics.avg_replans:.1f}"
    )


def render_table(metrics: Sequence[TaskMetrics]) -> str:
    width = max([len("task"), *(len(m.task_id) for m in metrics)])
    lines = [f"{'task':<{width}}  Success, Steps, Replan"]
    label = None
    for item in metrics:
        if item.label and item.label != label:
            lines.append(f"[{item.label}]")
            label = item.label
        lines.append(f"{item.task_id:<{width}}  {render_row(item)}")
    return "\n".join(lines)


def write_summary(metrics: Sequence[TaskMetrics], out_dir: Path | str) -> tuple[Path, Path]:
    out = Path(out_dir)
    text_path = out / "summary.txt"
    csv_path = out / "summary.csv"
    text_path.write_text(render_table(metrics) + "\n", encoding="utf-8")
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for item in metrics:
            writer.writerow(
                [
                    item.label or "",
                    item.task_id,
                    item.n,
                    f"{item.success_rate:.4f}",
                    f"{item.success_se:.4f}",
                    "" if item.avg_steps is None else f"{item.avg_steps:.4f}",
                    f"{item.avg_replans:.4f}",
                    render_row(item),
                ]
            )
    return text_path, csv_path


def load_results_metrics(out_dir: Path | str) -> list[TaskMetrics]:
    """Recompute metrics from the ``results_<task>.json`` files of an output directory."""

    metrics = []
    for path in sorted(Path(out_dir).glob("results_*.json")):
        rows = json.loads(path.read_text(encoding="utf-8"))
        results = [
            EpisodeResult.model_validate({k: v for k, v in row.items() if k != "transcript"})
            for row in rows
        ]
        if results:
            metrics.append(compute_metrics(results))
    return metrics
