from retrocollab.dialogue.metrics import TaskMetrics

from .experiment import ExperimentConfig, run_experiment
from .oracle import OraclePlanningError, oracle_plans, oracle_script
from .replay import replay_episode
from .report import load_results_metrics, render_row, render_table, write_summary

__all__ = [
    "ExperimentConfig",
    "OraclePlanningError",
    "TaskMetrics",
    "load_results_metrics",
    "oracle_plans",
    "oracle_script",
    "render_row",
    "render_table",
    "replay_episode",
    "run_experiment",
    "write_summary",
]
