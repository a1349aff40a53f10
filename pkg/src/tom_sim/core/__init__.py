"""Episode and batch execution."""

from .simulator import (
    BatchResult,
    EpisodeResult,
    Metrics,
    RunConfig,
    Simulator,
    run_batch,
    run_episode,
)

__all__ = [
    "BatchResult",
    "EpisodeResult",
    "Metrics",
    "RunConfig",
    "Simulator",
    "run_batch",
    "run_episode",
]
