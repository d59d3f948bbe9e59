from __future__ import annotations


class DialogueError(Exception):
    """Base class for orchestration failures."""


class MixedTaskError(DialogueError, ValueError):
    """Metrics were requested over episodes of more than one task."""
