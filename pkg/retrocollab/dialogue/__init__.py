from .discussion import DiscussionOutcome, retrospect, run_discussion
from .errors import DialogueError, MixedTaskError
from .metrics import TaskMetrics, compute_metrics
from .runtime import EpisodeBackends, build_backends, build_episode_graph, run_episode
from .schemas import EpisodeConfig, EpisodeResult, FailureReason
from .state import EpisodeContext, EpisodeState
from .transcript import TranscriptRecorder, read_events

__all__ = [
    "DialogueError",
    "DiscussionOutcome",
    "EpisodeBackends",
    "EpisodeConfig",
    "EpisodeContext",
    "EpisodeResult",
    "EpisodeState",
    "FailureReason",
    "MixedTaskError",
    "TaskMetrics",
    "TranscriptRecorder",
    "build_backends",
    "build_episode_graph",
    "compute_metrics",
    "read_events",
    "retrospect",
    "run_discussion",
    "run_episode",
]
