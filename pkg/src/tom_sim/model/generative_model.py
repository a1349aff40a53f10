"""
Factored POMDP generative models.

A model lists its hidden state factors (with action-conditioned transitions
over declared parent factors), its observation modalities (likelihoods over
declared parent factors), log-preferences per modality, priors per factor,
the named action repertoire and the planning horizon. Tables are dense over
the declared parents only.

Table layouts:
    likelihood:  (outcomes, *parent state counts)
    transition:  (next state, current state, *parent state counts, actions)
                 with an action axis of length 1 when the factor is not
                 controlled by the agent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax

from ..inference.belief import (
    Categorical,
    FactoredBelief,
    LikelihoodSlice,
    contract,
    expected_observation,
)
from ..utils.errors import ModelValidationError

COLUMN_TOLERANCE = 1e-9


def _readonly(table: np.ndarray) -> np.ndarray:
    arr = np.array(table, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModalitySpec:
    """One observation channel and its likelihood P(o | parents)."""

    name: str
    outcome_count: int
    parent_factors: Tuple[int, ...]
    likelihood: np.ndarray
    outcome_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'parent_factors', tuple(int(p) for p in self.parent_factors))
        object.__setattr__(self, 'likelihood', _readonly(self.likelihood))

    def slice(self, outcome: int) -> LikelihoodSlice:
        return LikelihoodSlice(self.parent_factors, self.likelihood[outcome])

    def label(self, outcome: int) -> str:
        if self.outcome_labels:
            return self.outcome_labels[outcome]
        return str(outcome)


@dataclass(frozen=True, eq=False)
class FactorSpec:
    """One hidden state factor and its transition P(s' | s, parents, action)."""

    name: str
    state_count: int
    parent_factors: Tuple[int, ...]
    controlled: bool
    transition: np.ndarray
    state_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'parent_factors', tuple(int(p) for p in self.parent_factors))
        object.__setattr__(self, 'transition', _readonly(self.transition))

    def transition_for(self, action: int) -> np.ndarray:
        """Transition table with the action axis resolved."""
        return self.transition[..., action if self.controlled else 0]

    def _hold(self, shape: Tuple[int, ...]) -> np.ndarray:
        eye = np.eye(self.state_count).reshape(
            (self.state_count, self.state_count) + (1,) * (len(shape) - 2))
        return np.broadcast_to(eye, shape)

    @cached_property
    def passive_transition(self) -> np.ndarray:
        """What the factor does whatever the agent does.

        Columns every action agrees on are kept (spawning, a wandering
        other agent); columns some action changes hold the state instead.
        """
        first = self.transition[..., 0]
        if not self.controlled or self.transition.shape[-1] == 1:
            return first
        agreed = np.all(np.abs(self.transition - self.transition[..., :1]) <= COLUMN_TOLERANCE,
                        axis=(0, -1))
        return np.where(agreed[None], first, self._hold(first.shape))

    def effect_transition(self, action: int) -> Optional[np.ndarray]:
        """Only the change ``action`` itself makes: its columns where they
        differ from :attr:`passive_transition`, the identity elsewhere.
        None when the action changes nothing."""
        acted = self.transition_for(action)
        changed = np.any(np.abs(acted - self.passive_transition) > COLUMN_TOLERANCE, axis=0)
        if not changed.any():
            return None
        return np.where(changed[None], acted, self._hold(acted.shape))

    def label(self, state: int) -> str:
        if self.state_labels:
            return self.state_labels[state]
        return str(state)


@dataclass(frozen=True, eq=False)
class Preferences:
    """Log-preference vector C per modality (nats, unnormalized)."""

    log_preferences: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'log_preferences',
                           tuple(_readonly(c) for c in self.log_preferences))

    def __len__(self) -> int:
        return len(self.log_preferences)

    def utilities(self, modality: int) -> np.ndarray:
        """-ln sigma(C)[o] for every outcome of a modality."""
        return -log_softmax(self.log_preferences[modality])


@dataclass(frozen=True, eq=False)
class GenerativeModel:
    """Factored POMDP an agent plans with."""

    name: str
    factors: Tuple[FactorSpec, ...]
    modalities: Tuple[ModalitySpec, ...]
    preferences: Preferences
    priors: Tuple[Categorical, ...]
    actions: Tuple[str, ...]
    horizon: int = 3
    # Factors describing the agent itself; the rest describe its world.
    self_factors: Tuple[int, ...] = ()
    _utilities: Tuple[np.ndarray, ...] = field(default=(), init=False, repr=False,
                                               compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'factors', tuple(self.factors))
        object.__setattr__(self, 'modalities', tuple(self.modalities))
        object.__setattr__(self, 'priors', tuple(self.priors))
        object.__setattr__(self, 'actions', tuple(self.actions))
        object.__setattr__(self, 'self_factors', tuple(self.self_factors))
        if len(self.preferences) == len(self.modalities):
            object.__setattr__(self, '_utilities', tuple(
                self.preferences.utilities(m) for m in range(len(self.modalities))))

    @property
    def world_factors(self) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.factors)) if i not in self.self_factors)

    @property
    def action_count(self) -> int:
        return len(self.actions)

    def factor_index(self, name: str) -> int:
        for index, factor in enumerate(self.factors):
            if factor.name == name:
                return index
        raise KeyError(f"model '{self.name}' has no factor '{name}'")

    def modality_index(self, name: str) -> int:
        for index, modality in enumerate(self.modalities):
            if modality.name == name:
                return index
        raise KeyError(f"model '{self.name}' has no modality '{name}'")

    def action_index(self, name: str) -> int:
        return self.actions.index(name)

    def prior_belief(self) -> FactoredBelief:
        return FactoredBelief(self.priors)

    def utility(self, modality: int, outcome: int) -> float:
        return float(self._utilities[modality][outcome])

    # -- belief propagation ---------------------------------------------

    def predict_factor(self, belief: FactoredBelief, factor: int, action: int) -> Categorical:
        """Predicted next-step marginal of one factor (parents read at the current step)."""
        spec = self.factors[factor]
        vectors = [belief[factor].probs] + [belief[p].probs for p in spec.parent_factors]
        return Categorical(np.clip(contract(spec.transition_for(action), vectors), 0.0, None))

    def predict(self, belief: FactoredBelief, action: int,
                skip: Sequence[int] = ()) -> FactoredBelief:
        """Propagate every factor under ``action``; factors in ``skip`` are kept as-is."""
        return FactoredBelief(tuple(
            belief[f] if f in skip else self.predict_factor(belief, f, action)
            for f in range(len(self.factors))
        ))

    def predict_effect(self, belief: FactoredBelief, action: int,
                       factors: Optional[Sequence[int]] = None) -> FactoredBelief:
        """``belief`` with only what ``action`` itself changes applied to
        ``factors`` (every factor by default); the rest is kept as-is."""
        updated = list(belief.factors)
        for f in (range(len(self.factors)) if factors is None else factors):
            spec = self.factors[f]
            table = spec.effect_transition(action)
            if table is None:
                continue
            vectors = [belief[f].probs] + [belief[p].probs for p in spec.parent_factors]
            updated[f] = Categorical(np.clip(contract(table, vectors), 0.0, None))
        return FactoredBelief(tuple(updated))

    def expected_outcomes(self, belief: FactoredBelief) -> List[Categorical]:
        return [expected_observation(belief, m.likelihood, m.parent_factors)
                for m in self.modalities]

    def likelihood_slices(self, outcome: Sequence[int]) -> List[LikelihoodSlice]:
        return [m.slice(o) for m, o in zip(self.modalities, outcome)]


def _column_violations(kind: str, name: str, table: np.ndarray) -> List[str]:
    violations = []
    if not np.all(np.isfinite(table)):
        violations.append(f"{kind} '{name}' has non-finite entries")
        return violations
    if np.any(table < 0):
        violations.append(f"{kind} '{name}' has negative entries")
    sums = table.sum(axis=0)
    bad = np.argwhere(np.abs(sums - 1.0) > COLUMN_TOLERANCE)
    for column in bad[:5]:
        index = tuple(int(i) for i in column)
        violations.append(f"{kind} '{name}' column {index} sums to {float(sums[index]):.6g}")
    if len(bad) > 5:
        violations.append(f"{kind} '{name}' has {len(bad) - 5} more bad columns")
    return violations


def validate(model: GenerativeModel) -> List[str]:
    """Return every normalization/index violation; empty iff the model is well formed."""
    violations: List[str] = []
    n_factors = len(model.factors)

    if not isinstance(model.horizon, int) or model.horizon < 1:
        violations.append(f"horizon must be >= 1, got {model.horizon!r}")
    if not model.actions:
        violations.append("model has no actions")

    for factor in model.factors:
        bad_parents = [p for p in factor.parent_factors if not 0 <= p < n_factors]
        if bad_parents:
            violations.append(f"factor '{factor.name}' parent index out of range: {bad_parents}")
            continue
        expected = ((factor.state_count, factor.state_count)
                    + tuple(model.factors[p].state_count for p in factor.parent_factors)
                    + ((len(model.actions) if factor.controlled else 1),))
        if factor.transition.shape != expected:
            violations.append(f"factor '{factor.name}' transition shape "
                              f"{factor.transition.shape} != {expected}")
            continue
        violations.extend(_column_violations('factor', factor.name, factor.transition))

    for modality in model.modalities:
        bad_parents = [p for p in modality.parent_factors if not 0 <= p < n_factors]
        if bad_parents:
            violations.append(
                f"modality '{modality.name}' parent index out of range: {bad_parents}")
            continue
        expected = ((modality.outcome_count,)
                    + tuple(model.factors[p].state_count for p in modality.parent_factors))
        if modality.likelihood.shape != expected:
            violations.append(f"modality '{modality.name}' likelihood shape "
                              f"{modality.likelihood.shape} != {expected}")
            continue
        violations.extend(_column_violations('modality', modality.name, modality.likelihood))

    if len(model.preferences) != len(model.modalities):
        violations.append(f"{len(model.preferences)} preference vectors for "
                          f"{len(model.modalities)} modalities")
    else:
        for modality, c in zip(model.modalities, model.preferences.log_preferences):
            if c.shape != (modality.outcome_count,):
                violations.append(f"preferences for '{modality.name}' have shape {c.shape}")
            elif not np.all(np.isfinite(c)):
                violations.append(f"preferences for '{modality.name}' must be finite")

    if len(model.priors) != n_factors:
        violations.append(f"{len(model.priors)} priors for {n_factors} factors")
    else:
        for factor, prior in zip(model.factors, model.priors):
            if len(prior) != factor.state_count:
                violations.append(f"prior for '{factor.name}' has {len(prior)} entries, "
                                  f"expected {factor.state_count}")

    bad_self = [f for f in model.self_factors if not 0 <= f < n_factors]
    if bad_self:
        violations.append(f"self factor index out of range: {bad_self}")
    return violations


def ensure_valid(model: GenerativeModel) -> GenerativeModel:
    """Raise ModelValidationError listing every violation, else return the model."""
    violations = validate(model)
    if violations:
        raise ModelValidationError(model.name, violations)
    return model


def joint_outcomes(marginals: Sequence[Categorical]) -> List[Tuple[Tuple[int, ...], float]]:
    """Mean-field joint outcomes: product of per-modality marginals, zero-probability
    combinations omitted, enumerated in lexicographic order."""
    supports = [[(i, float(p)) for i, p in enumerate(m.probs) if p > 0] for m in marginals]
    result = []
    for combo in itertools.product(*supports):
        prob = 1.0
        for _, p in combo:
            prob *= p
        result.append((tuple(i for i, _ in combo), prob))
    return result


def outcome_label(model: GenerativeModel, outcome: Sequence[int]) -> str:
    return ','.join(f"{m.name}={m.label(o)}" for m, o in zip(model.modalities, outcome))


