"""Agents that filter, plan and act."""

from .agent import (
    PLANNER_KINDS,
    PlanCache,
    SIAgent,
    ToMAgent,
    build_agent_model,
    filter_belief,
    make_agent,
    observation_outcome,
)

__all__ = [
    "PLANNER_KINDS",
    "PlanCache",
    "SIAgent",
    "ToMAgent",
    "build_agent_model",
    "filter_belief",
    "make_agent",
    "observation_outcome",
]
