from .errors import PlanParseError, SourceSpan
from .parser import EXECUTE_MARKER, extract_execute_block, parse_plan, render_plan
from .plan import ActionPlan, AgentAction, Verb, wait_plan

__all__ = [
    "EXECUTE_MARKER",
    "ActionPlan",
    "AgentAction",
    "PlanParseError",
    "SourceSpan",
    "Verb",
    "extract_execute_block",
    "parse_plan",
    "render_plan",
    "wait_plan",
]
