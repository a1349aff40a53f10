"""
tom-sim: Active-inference agents with and without theory of mind

Discrete generative models, sophisticated-inference tree search, a joint
planner that simulates a second agent, and two small gridworld tasks to
compare them on.
"""

__version__ = "0.1.0"
__author__ = "tom-sim Development Team"

from .agents.agent import SIAgent, ToMAgent, make_agent
from .core.simulator import Metrics, RunConfig, Simulator
from .environment.grid_world import TaskConfig
from .model.generative_model import GenerativeModel
from .planning.config import PlannerConfig, ToMPlannerConfig
from .planning.sophisticated import SophisticatedPlanner
from .planning.theory_of_mind import TheoryOfMindPlanner, ToMBeliefState

__all__ = [
    "GenerativeModel",
    "Metrics",
    "PlannerConfig",
    "RunConfig",
    "SIAgent",
    "Simulator",
    "SophisticatedPlanner",
    "TaskConfig",
    "TheoryOfMindPlanner",
    "ToMAgent",
    "ToMBeliefState",
    "ToMPlannerConfig",
    "make_agent",
]
