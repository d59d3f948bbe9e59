from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

from sqlalchemy import (
    Boolean,
    Column,
    DateTime,
    ForeignKey,
    Index,
    Integer,
    String,
    Text,
    create_engine,
    func,
    select,
)
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, Session, relationship

from retrocollab.dialogue.metrics import TaskMetrics, compute_metrics
from retrocollab.dialogue.schemas import EpisodeResult

__all__ = [
    "Base",
    "EpisodeRow",
    "ExperimentRun",
    "ledger_engine",
    "load_ledger_metrics",
    "record_run",
]


class Base(DeclarativeBase):
    pass


class ExperimentRun(Base):
    __tablename__ = "experiment_run"

    id = Column(Integer, primary_key=True)
    label = Column(String(80), nullable=True, index=True)
    config_json = Column(Text, nullable=False)
    created_at = Column(DateTime, server_default=func.now())

    episodes = relationship("EpisodeRow", back_populates="run", lazy="selectin")

    def __repr__(self) -> str:  # pragma: no cover - debugging helper
        return f"<ExperimentRun {self.id} {self.label}>"


class EpisodeRow(Base):
    __tablename__ = "episode"

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("experiment_run.id"), nullable=False)
    episode_id = Column(String(120), nullable=False)
    task_id = Column(String(40), nullable=False)
    seed = Column(Integer, nullable=False)
    success = Column(Boolean, nullable=False)
    steps = Column(Integer, nullable=False)
    replans = Column(Integer, nullable=False)
    rounds = Column(Integer, nullable=False, default=0)
    failure_reason = Column(String(40), nullable=True)
    config_fingerprint = Column(String(64), nullable=False)
    transcript_path = Column(Text, nullable=True)

    run = relationship("ExperimentRun", back_populates="episodes")

    __table_args__ = (Index("ix_episode_run_task", "run_id", "task_id"),)

    def to_result(self) -> EpisodeResult:
        return EpisodeResult(
            episode_id=self.episode_id,
            task_id=self.task_id,
            seed=self.seed,
            success=self.success,
            steps=self.steps,
            replans=self.replans,
            rounds=self.rounds,
            failure_reason=self.failure_reason,
            config_fingerprint=self.config_fingerprint,
            transcript_path=self.transcript_path,
        )


def ledger_engine(db_path: Path | str) -> Engine:
    engine = create_engine(f"sqlite:///{Path(db_path)}")
    Base.metadata.create_all(engine)
    return engine


def record_run(
    db_path: Path | str, results: Iterable[EpisodeResult], *, label: str | None, config_json: str
) -> int:
    """Store one experiment run with its episodes and return the run id.

    Episodes of earlier runs with the same label and task are replaced, the way a rerun
    overwrites ``results_<task>.json`` in the same directory.
    """

    results = list(results)
    tasks = sorted({result.task_id for result in results})
    same_label = ExperimentRun.label.is_(None) if label is None else ExperimentRun.label == label
    engine = ledger_engine(db_path)
    with Session(engine) as session:
        stale = session.scalars(
            select(EpisodeRow).join(ExperimentRun).where(same_label, EpisodeRow.task_id.in_(tasks))
        ).all()
        for row in stale:
            session.delete(row)
        session.flush()
        emptied = session.scalars(
            select(ExperimentRun).where(same_label, ~ExperimentRun.episodes.any())
        ).all()
        for old in emptied:
            session.delete(old)

        run = ExperimentRun(label=label, config_json=config_json)
        session.add(run)
        for result in results:
            session.add(
                EpisodeRow(
                    run=run,
                    episode_id=result.episode_id,
                    task_id=result.task_id,
                    seed=result.seed,
                    success=result.success,
                    steps=result.steps,
                    replans=result.replans,
                    rounds=result.rounds,
                    failure_reason=result.failure_reason,
                    config_fingerprint=result.config_fingerprint,
                    transcript_path=str(result.transcript_path) if result.transcript_path else None,
                )
            )
        session.commit()
        run_id = run.id
    engine.dispose()
    return run_id


def load_ledger_metrics(db_path: Path | str, *, label: str | None = None) -> list[TaskMetrics]:
    """Recompute per-task metrics from the ledger, grouped by label and ordered by task and seed."""

    engine = ledger_engine(db_path)
    with Session(engine) as session:
        query = (
            select(EpisodeRow, ExperimentRun.label)
            .join(ExperimentRun)
            .order_by(ExperimentRun.label, EpisodeRow.task_id, EpisodeRow.seed, EpisodeRow.id)
        )
        if label is not None:
            query = query.where(ExperimentRun.label == label)
        groups: dict[tuple[str, str], list[EpisodeResult]] = {}
        for row, run_label in session.execute(query):
            groups.setdefault((run_label or "", row.task_id), []).append(row.to_result())
    engine.dispose()
    return [
        compute_metrics(results, label=run_label or None)
        for (run_label, _), results in sorted(groups.items())
    ]
