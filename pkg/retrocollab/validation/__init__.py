from .checks import check_collisions, check_reachability, check_subgoals, occupancy, validate
from .findings import Finding, FindingKind, ValidationReport

__all__ = [
    "Finding",
    "FindingKind",
    "ValidationReport",
    "check_collisions",
    "check_reachability",
    "check_subgoals",
    "occupancy",
    "validate",
]
