from __future__ import annotations

import math
from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import MixedTaskError
from .schemas import EpisodeResult

__all__ = ["TaskMetrics", "compute_metrics"]


class TaskMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    n: int = Field(..., ge=1, description="Episodes aggregated")
    successes: int = Field(..., ge=0)
    success_rate: float = Field(..., ge=0.0, le=1.0)
    success_se: float = Field(..., ge=0.0, description="Binomial standard error sqrt(p(1-p)/n)")
    avg_steps: float | None = Field(None, description="Mean steps over successful episodes")
    avg_replans: float = Field(..., ge=0.0, description="Mean replans over all episodes")
    label: str | None = Field(None, description="Ablation arm the episodes belong to")

    @model_validator(mode="after")
    def _steps_need_success(self) -> TaskMetrics:
        if (self.avg_steps is None) != (self.successes == 0):
            raise ValueError("avg_steps is present exactly when some episode succeeded")
        return self


def compute_metrics(results: Sequence[EpisodeResult], *, label: str | None = None) -> TaskMetrics:
    if not results:
        raise ValueError("cannot aggregate an empty result list")
    tasks = sorted({result.task_id for result in results})
    if len(tasks) > 1:
        raise MixedTaskError(f"results mix tasks: {', '.join(tasks)}")
    n = len(results)
    won = [result for result in results if result.success]
    rate = len(won) / n
    return TaskMetrics(
        task_id=tasks[0],
        n=n,
        successes=len(won),
        success_rate=rate,
        success_se=math.sqrt(rate * (1 - rate) / n),
        avg_steps=sum(result.steps for result in won) / len(won) if won else None,
        avg_replans=sum(result.replans for result in results) / n,
        label=label,
    )
