"""Exact discrete belief machinery."""

from .belief import (
    EPSILON,
    Categorical,
    FactoredBelief,
    LikelihoodMessage,
    LikelihoodSlice,
    apply_message,
    bayes_update,
    expected_observation,
    kl_divergence,
    normalize,
    smooth,
    softmax_neg,
)

__all__ = [
    "EPSILON",
    "Categorical",
    "FactoredBelief",
    "LikelihoodMessage",
    "LikelihoodSlice",
    "apply_message",
    "bayes_update",
    "expected_observation",
    "kl_divergence",
    "normalize",
    "smooth",
    "softmax_neg",
]
