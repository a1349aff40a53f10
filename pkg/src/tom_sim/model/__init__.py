"""Generative models of the two gridworld tasks."""

from .builders import (
    Correspondence,
    build_collision_model,
    build_foraging_model,
    model_of_other,
)
from .generative_model import (
    FactorSpec,
    GenerativeModel,
    ModalitySpec,
    Preferences,
    ensure_valid,
    joint_outcomes,
    validate,
)
from .grid import COLLISION_ACTIONS, FORAGING_ACTIONS, Grid
from .serialization import dump_model, load_model, models_equal

__all__ = [
    "COLLISION_ACTIONS",
    "FORAGING_ACTIONS",
    "Correspondence",
    "FactorSpec",
    "GenerativeModel",
    "Grid",
    "ModalitySpec",
    "Preferences",
    "build_collision_model",
    "build_foraging_model",
    "dump_model",
    "ensure_valid",
    "joint_outcomes",
    "load_model",
    "model_of_other",
    "models_equal",
    "validate",
]
