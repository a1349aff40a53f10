"""Sophisticated-inference and Theory-of-Mind planners."""

from .config import PlannerConfig, ToMPlannerConfig
from .sophisticated import (
    SophisticatedPlanner,
    efe_one_step,
    plan,
    prune_observations,
    prune_policies,
    select_action,
)
from .theory_of_mind import (
    TheoryOfMindPlanner,
    ToMBeliefState,
    focal_observation_expansion,
    focal_policy_expansion,
    other_observation_expansion,
    other_policy_expansion,
    tom_plan,
    world_message_from_other,
)
from .tree import NodeKind, Owner, PlanNode, PlanTree, alternation_violations

__all__ = [
    "NodeKind",
    "Owner",
    "PlanNode",
    "PlanTree",
    "PlannerConfig",
    "SophisticatedPlanner",
    "TheoryOfMindPlanner",
    "ToMBeliefState",
    "ToMPlannerConfig",
    "alternation_violations",
    "efe_one_step",
    "focal_observation_expansion",
    "focal_policy_expansion",
    "other_observation_expansion",
    "other_policy_expansion",
    "plan",
    "prune_observations",
    "prune_policies",
    "select_action",
    "tom_plan",
    "world_message_from_other",
]
