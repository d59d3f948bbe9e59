from __future__ import annotations

from pathlib import Path

import pytest

from retrocollab.config import Config
from retrocollab.dialogue.schemas import EpisodeConfig
from retrocollab.llm.schemas import BackendConfig
from retrocollab.memory.prompting import PromptTemplates
from retrocollab.world.tasks import load_task

_ORACLE_STEPS = {
    "sort_cubes": 2,
    "arrange_cabinet": 3,
    "sweep_floor": 4,
    "make_sandwich": 5,
    "move_rope": 2,
}


@pytest.fixture()
def results_dir(tmp_path, monkeypatch) -> Path:
    directory = tmp_path / "results"
    monkeypatch.setattr(Config, "RESULTS_DIR", str(directory))
    return directory


@pytest.fixture()
def templates() -> PromptTemplates:
    return PromptTemplates()


@pytest.fixture()
def task():
    def make(task_id: str, seed: int = 0):
        return load_task(task_id, seed)

    return make


@pytest.fixture()
def oracle_config():
    def make(task_id: str, seed: int = 0, **overrides) -> EpisodeConfig:
        return EpisodeConfig(
            task_id=task_id,
            seed=seed,
            llm1=BackendConfig(kind="oracle"),
            llm2=BackendConfig(kind="oracle"),
            **overrides,
        )

    return make


@pytest.fixture()
def oracle_steps() -> dict[str, int]:
    return dict(_ORACLE_STEPS)
