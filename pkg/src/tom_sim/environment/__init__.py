"""Ground-truth gridworld simulator."""

from .grid_world import (
    AGENTS,
    AgentObservation,
    GridWorldState,
    JointAction,
    ObservationBundle,
    OutcomeRecord,
    TaskConfig,
    TraceRecord,
    is_done,
    observe,
    reset,
    step,
)

__all__ = [
    "AGENTS",
    "AgentObservation",
    "GridWorldState",
    "JointAction",
    "ObservationBundle",
    "OutcomeRecord",
    "TaskConfig",
    "TraceRecord",
    "is_done",
    "observe",
    "reset",
    "step",
]
