from .geometry import GridCell, GridDims, ReachEnvelope, path_is_connected
from .simulator import RopeViolation, apply_plan, is_success, observe, rope_violations
from .state import (
    Location,
    Observation,
    RobotState,
    SimulationInconsistencyError,
    UnknownRobotError,
    UnknownTaskError,
    WorldError,
    WorldState,
)
from .tasks import TASK_IDS, RobotSpec, RopeSpec, TaskSpec, load_task

__all__ = [
    "TASK_IDS",
    "GridCell",
    "GridDims",
    "Location",
    "Observation",
    "ReachEnvelope",
    "RobotSpec",
    "RobotState",
    "RopeSpec",
    "RopeViolation",
    "SimulationInconsistencyError",
    "TaskSpec",
    "UnknownRobotError",
    "UnknownTaskError",
    "WorldError",
    "WorldState",
    "apply_plan",
    "is_success",
    "load_task",
    "observe",
    "path_is_connected",
    "rope_violations",
]
