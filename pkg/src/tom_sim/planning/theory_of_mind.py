"""
Theory-of-Mind planning over joint policies.

The focal agent keeps two factored beliefs: its own (over its model's
factors) and the one it attributes to the other agent (over the other's
model's factors). Each is split into a self block and a world block by the
owning model's ``self_factors``. A :class:`Correspondence` matches the
factors the two perspectives share, e.g. the focal's ``other_location``
and the other's ``own_location``.

Every horizon step expands, in order:

1. the other's policies, scored by a plain sophisticated-inference search
   under the other's model and preferences;
2. the focal's policies, after the change the other's hypothesised action
   makes to its own world beliefs has been passed to the focal as a
   likelihood message and applied to the shared world factors, and with
   the focal's picture of the other's self factors moved by that action;
3. the focal's observations and posteriors;
4. the other's observations, predicted from the other's self beliefs
   paired with the focal's updated world beliefs.

The backwards pass scores each joint branch on focal preferences only,
marginalises the other's policy probabilities and returns a posterior over
focal actions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..inference.belief import (
    EPSILON,
    Categorical,
    FactoredBelief,
    LikelihoodMessage,
    apply_message,
    contract,
    expected_observation,
    smooth,
)
from ..model.builders import Correspondence
from ..model.generative_model import GenerativeModel, outcome_label
from ..utils.errors import (
    CorrespondenceGapError,
    InvalidHorizonError,
    ModelValidationError,
    ZeroMassError,
)
from .config import ToMPlannerConfig
from .sophisticated import (
    OutcomeEvaluation,
    SearchCache,
    SophisticatedPlanner,
    check_belief,
    evaluate_outcomes,
    expected_immediate_efe,
    posterior_over,
    prune_policies,
)
from .tree import (
    STEP_BACKWARD_PASS,
    STEP_FOCAL_OBSERVATION,
    STEP_FOCAL_POLICY,
    STEP_OTHER_OBSERVATION,
    STEP_OTHER_POLICY,
    NodeKind,
    Owner,
    PlanNode,
    PlanTree,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToMBeliefState:
    """Focal and attributed beliefs plus the map between their factors."""

    focal: FactoredBelief
    other: FactoredBelief
    correspondence: Correspondence
    focal_self_factors: Tuple[int, ...]
    other_self_factors: Tuple[int, ...]

    @classmethod
    def from_models(cls, focal_model: GenerativeModel, other_model: GenerativeModel,
                    focal: Optional[FactoredBelief] = None,
                    other: Optional[FactoredBelief] = None,
                    correspondence: Optional[Correspondence] = None) -> "ToMBeliefState":
        """Start from the models' priors unless beliefs are given.

        Raises:
            ModelValidationError: the correspondence is not a bijection on
                factors of equal cardinality.
        """
        correspondence = correspondence or Correspondence.between(focal_model, other_model)
        problems = correspondence.violations(focal_model, other_model)
        if problems:
            raise ModelValidationError(f"{focal_model.name}<->{other_model.name}", problems)
        return cls(
            focal=focal if focal is not None else focal_model.prior_belief(),
            other=other if other is not None else other_model.prior_belief(),
            correspondence=correspondence,
            focal_self_factors=focal_model.self_factors,
            other_self_factors=other_model.self_factors,
        )

    def _block(self, belief: FactoredBelief, indices: Sequence[int]) -> FactoredBelief:
        return FactoredBelief(tuple(belief[i] for i in indices))

    @property
    def focal_world_factors(self) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.focal)) if i not in self.focal_self_factors)

    @property
    def other_world_factors(self) -> Tuple[int, ...]:
        return tuple(j for j in range(len(self.other)) if j not in self.other_self_factors)

    @property
    def f_self(self) -> FactoredBelief:
        return self._block(self.focal, self.focal_self_factors)

    @property
    def f_world(self) -> FactoredBelief:
        return self._block(self.focal, self.focal_world_factors)

    @property
    def o_self(self) -> FactoredBelief:
        return self._block(self.other, self.other_self_factors)

    @property
    def o_world(self) -> FactoredBelief:
        return self._block(self.other, self.other_world_factors)

    def with_beliefs(self, focal: FactoredBelief, other: FactoredBelief) -> "ToMBeliefState":
        return ToMBeliefState(focal, other, self.correspondence,
                              self.focal_self_factors, self.other_self_factors)

    def key(self) -> bytes:
        return self.focal.key() + b'||' + self.other.key()


@dataclass(frozen=True)
class OtherPolicy:
    """One retained action of the other. ``predicted`` is its full one-step
    prediction; ``acted`` applies only what the action itself changes to
    the other's world factors."""

    action: int
    probability: float
    efe: float
    predicted: FactoredBelief
    acted: FactoredBelief


@dataclass(frozen=True)
class OtherObservation:
    outcome: Tuple[int, ...]
    probability: float
    posterior: FactoredBelief


# ---------------------------------------------------------------------------
# Expansion steps
# ---------------------------------------------------------------------------

def other_policy_expansion(state: ToMBeliefState, other_model: GenerativeModel,
                           config: ToMPlannerConfig, depth: int = 1,
                           planner: Optional[SophisticatedPlanner] = None) -> List[OtherPolicy]:
    """What the other agent would choose to do, with ``depth`` steps left.

    The other is scored by a plain search under its own model (no model of
    the focal agent), to the remaining depth or one step when the config
    asks for a greedy other. The posterior is pruned with the other's
    policy threshold and each retained action carries the other's
    predicted belief.
    """
    planner = planner or SophisticatedPlanner(other_model, config.for_other(), Owner.OTHER)
    lookahead = 1 if config.other_lookahead == 'greedy' else depth
    _, posterior, policy_nodes = planner.expand(state.other, lookahead)
    values = {node.action: node.efe for node in policy_nodes}
    retained = prune_policies(posterior, config.other_policy_prune_threshold)
    world = state.other_world_factors
    return [OtherPolicy(action, probability, values[action],
                        other_model.predict(state.other, action),
                        other_model.predict_effect(state.other, action, world))
            for action, probability in sorted(retained.items())]


def world_message_from_other(prior: FactoredBelief, posterior: FactoredBelief,
                             state: ToMBeliefState) -> LikelihoodMessage:
    """Ratio posterior / prior of the other's world factors, moved onto the
    focal's world factors. Everything else receives an all-ones message."""
    if prior.cardinalities != posterior.cardinalities:
        raise ValueError("prior and posterior cover different factors")
    weights = [np.ones(n) for n in state.focal.cardinalities]
    focal_world = set(state.focal_world_factors)
    for j in state.other_world_factors:
        i = state.correspondence.focal_of(j)
        if i is None or i not in focal_world:
            continue
        if np.array_equal(prior[j].probs, posterior[j].probs):
            continue
        weights[i] = (np.maximum(posterior[j].probs, EPSILON)
                      / np.maximum(prior[j].probs, EPSILON))
    return LikelihoodMessage(tuple(weights))


def _mapped_parents(state: ToMBeliefState, other_model: GenerativeModel, other_factor: int,
                    focal_belief: FactoredBelief) -> List[np.ndarray]:
    vectors = []
    for parent in other_model.factors[other_factor].parent_factors:
        i = state.correspondence.focal_of(parent)
        if i is None:
            raise CorrespondenceGapError(other_model.factors[parent].name, 'other')
        vectors.append(focal_belief[i].probs)
    return vectors


def focal_policy_expansion(belief: FactoredBelief, state: ToMBeliefState,
                           focal_model: GenerativeModel, other_model: GenerativeModel,
                           other_action: int,
                           actions: Optional[Sequence[int]] = None
                           ) -> List[Tuple[int, FactoredBelief]]:
    """Predicted focal belief for every focal action under the other's ``other_action``.

    ``belief`` is the focal belief after the world message. Focal factors
    that stand for the other's self factors move by the other's transition
    under ``other_action``. Shared world factors first take what
    ``other_action`` itself changes (the other acts first, so an apple it
    eats is gone before the focal can eat it), which also reaches states
    the focal is certain of and a likelihood message cannot move. Then
    every factor but the overridden ones moves by the focal's own
    transition, so dynamics nobody controls are applied once.
    Parents of the other's tables are read through the correspondence.
    """
    overrides: Dict[int, Categorical] = {}
    for j in state.other_self_factors:
        i = state.correspondence.focal_of(j)
        if i is None:
            continue
        spec = other_model.factors[j]
        vectors = [belief[i].probs] + _mapped_parents(state, other_model, j, belief)
        overrides[i] = Categorical(np.clip(contract(spec.transition_for(other_action), vectors),
                                           0.0, None))
    acted = belief
    focal_world = set(state.focal_world_factors)
    for j in state.other_world_factors:
        i = state.correspondence.focal_of(j)
        table = other_model.factors[j].effect_transition(other_action)
        if i is None or i not in focal_world or table is None:
            continue
        vectors = [belief[i].probs] + _mapped_parents(state, other_model, j, belief)
        acted = acted.replace(i, Categorical(np.clip(contract(table, vectors), 0.0, None)))
    branches = []
    for action in (range(focal_model.action_count) if actions is None else actions):
        predicted = focal_model.predict(acted, action, skip=tuple(overrides))
        for i, factor in overrides.items():
            predicted = predicted.replace(i, factor)
        branches.append((action, predicted))
    return branches


def focal_observation_expansion(predicted: FactoredBelief, focal_model: GenerativeModel,
                                config: ToMPlannerConfig) -> List[OutcomeEvaluation]:
    """Outcomes the focal expects, pruned, each with its Bayes posterior."""
    return evaluate_outcomes(predicted, focal_model, config.observation_prune_threshold)


def other_observation_expansion(other_predicted: FactoredBelief, focal_posterior: FactoredBelief,
                                state: ToMBeliefState, other_model: GenerativeModel,
                                config: ToMPlannerConfig) -> List[OtherObservation]:
    """Outcomes the other is expected to see, and its posterior for each.

    Expected observations pair the other's own predicted self factors with
    the focal's updated beliefs about the world.

    Raises:
        CorrespondenceGapError: a world factor of the other has no focal counterpart.
    """
    paired = []
    for j in range(len(other_predicted)):
        if j in state.other_self_factors:
            paired.append(other_predicted[j])
            continue
        i = state.correspondence.focal_of(j)
        if i is None:
            raise CorrespondenceGapError(other_model.factors[j].name, 'other')
        paired.append(focal_posterior[i])
    pairing = FactoredBelief(tuple(paired))
    marginals = [expected_observation(pairing, m.likelihood, m.parent_factors)
                 for m in other_model.modalities]
    threshold = config.other_observation_prune_threshold
    try:
        evaluations = evaluate_outcomes(pairing, other_model, threshold, marginals=marginals,
                                        prior=other_predicted)
    except ZeroMassError:
        # the focal expects the other to see something the other rules out
        evaluations = evaluate_outcomes(pairing, other_model, threshold, marginals=marginals,
                                        prior=smooth(other_predicted))
    return [OtherObservation(e.outcome, e.probability, e.posterior) for e in evaluations]


# ---------------------------------------------------------------------------
# Joint search
# ---------------------------------------------------------------------------

@dataclass
class JointCache:
    """Joint subtrees keyed on (state bytes, depth); focal and other outcome
    evaluations keyed on the beliefs they were computed from."""

    entries: Dict[Tuple[bytes, int], Tuple[float, Categorical, List[PlanNode]]] = \
        field(default_factory=dict)
    focal_outcomes: Dict[bytes, List[OutcomeEvaluation]] = field(default_factory=dict)
    other_outcomes: Dict[bytes, List[OtherObservation]] = field(default_factory=dict)
    hits: int = 0


class TheoryOfMindPlanner:
    """Joint focal/other tree search for a pair of models."""

    def __init__(self, focal_model: GenerativeModel, other_model: GenerativeModel,
                 config: Optional[ToMPlannerConfig] = None):
        self.focal_model = focal_model
        self.other_model = other_model
        self.config = (config or ToMPlannerConfig()).validate()
        self.other_planner = SophisticatedPlanner(other_model, self.config.for_other(),
                                                  Owner.OTHER, SearchCache())
        self.cache = JointCache()

    def _focal_outcomes(self, predicted: FactoredBelief) -> List[OutcomeEvaluation]:
        key = predicted.key()
        if key not in self.cache.focal_outcomes:
            self.cache.focal_outcomes[key] = focal_observation_expansion(
                predicted, self.focal_model, self.config)
        return self.cache.focal_outcomes[key]

    def _other_outcomes(self, other_predicted: FactoredBelief, focal_posterior: FactoredBelief,
                        state: ToMBeliefState) -> List[OtherObservation]:
        key = other_predicted.key() + b'||' + focal_posterior.key()
        if key not in self.cache.other_outcomes:
            self.cache.other_outcomes[key] = other_observation_expansion(
                other_predicted, focal_posterior, state, self.other_model, self.config)
        return self.cache.other_outcomes[key]

    def _focal_value(self, evaluations: Sequence[OutcomeEvaluation],
                     other_predicted: FactoredBelief, state: ToMBeliefState, depth: int
                     ) -> Tuple[float, List[PlanNode]]:
        """G of one joint branch and its focal observation nodes."""
        observation_nodes = []
        for evaluation in evaluations:
            other_nodes = []
            for seen in self._other_outcomes(other_predicted, evaluation.posterior, state):
                future, children = 0.0, []
                if depth > 1:
                    future, _, children = self.expand(
                        state.with_beliefs(evaluation.posterior, seen.posterior), depth - 1)
                other_nodes.append(PlanNode(
                    kind=NodeKind.OBSERVATION, owner=Owner.OTHER, step=STEP_OTHER_OBSERVATION,
                    depth=depth, efe=future, probability=seen.probability,
                    outcome=seen.outcome,
                    outcome_label=outcome_label(self.other_model, seen.outcome),
                    belief=evaluation.posterior, other_belief=seen.posterior,
                    children=children,
                ))
            efe = evaluation.immediate_efe + sum(n.probability * n.efe for n in other_nodes)
            observation_nodes.append(PlanNode(
                kind=NodeKind.OBSERVATION, owner=Owner.FOCAL, step=STEP_FOCAL_OBSERVATION,
                depth=depth, efe=efe, probability=evaluation.probability,
                outcome=evaluation.outcome,
                outcome_label=outcome_label(self.focal_model, evaluation.outcome),
                belief=evaluation.posterior, other_belief=other_predicted,
                children=other_nodes,
            ))
        value = float(sum(n.probability * n.efe for n in observation_nodes))
        return value, observation_nodes

    def expand(self, state: ToMBeliefState,
               depth: int) -> Tuple[float, Categorical, List[PlanNode]]:
        """Value, focal posterior and other-policy nodes with ``depth`` steps left."""
        key = (state.key(), depth)
        cached = self.cache.entries.get(key)
        if cached is not None:
            self.cache.hits += 1
            return cached

        focal_model, config = self.focal_model, self.config
        other_policies = other_policy_expansion(state, self.other_model, config, depth,
                                                self.other_planner)

        # steps 1-2: the message carries what the other's action changes in its own
        # world beliefs; spawning and other shared dynamics stay with the focal's
        # transition. Focal pruning looks one step ahead.
        branches = []
        kept: Set[int] = set()
        for policy in other_policies:
            msg = world_message_from_other(state.other, policy.acted, state)
            informed = apply_message(state.focal, msg)
            predictions = dict(focal_policy_expansion(informed, state, focal_model,
                                                      self.other_model, policy.action))
            evaluations = {a: self._focal_outcomes(p) for a, p in predictions.items()}
            one_step = {a: expected_immediate_efe(e) for a, e in evaluations.items()}
            preliminary = posterior_over(one_step, focal_model.action_count, config.temperature)
            kept.update(prune_policies(preliminary, config.policy_prune_threshold))
            branches.append((policy, evaluations))

        # steps 3-4 and the backwards pass
        joint: Dict[Tuple[int, int], float] = {}
        other_nodes = []
        for policy, evaluations in branches:
            focal_nodes = []
            for action in sorted(kept):
                value, observation_nodes = self._focal_value(
                    evaluations[action], policy.predicted, state, depth)
                joint[policy.action, action] = value
                focal_nodes.append(PlanNode(
                    kind=NodeKind.POLICY, owner=Owner.FOCAL, step=STEP_FOCAL_POLICY,
                    depth=depth, efe=value, action=action,
                    action_name=focal_model.actions[action], children=observation_nodes,
                ))
            conditional = posterior_over({n.action: n.efe for n in focal_nodes},  # type: ignore[misc]
                                         focal_model.action_count, config.temperature)
            for node in focal_nodes:
                node.probability = conditional[node.action]  # type: ignore[index]
            other_nodes.append(PlanNode(
                kind=NodeKind.POLICY, owner=Owner.OTHER, step=STEP_OTHER_POLICY,
                depth=depth, efe=policy.efe, probability=policy.probability,
                action=policy.action, action_name=self.other_model.actions[policy.action],
                other_belief=policy.predicted, children=focal_nodes,
            ))

        marginal = {a: float(sum(policy.probability * joint[policy.action, a]
                                 for policy, _ in branches))
                    for a in sorted(kept)}
        posterior = posterior_over(marginal, focal_model.action_count, config.temperature)
        value = float(sum(posterior[a] * g for a, g in marginal.items()))
        result = (value, posterior, other_nodes)
        self.cache.entries[key] = result
        return result

    def plan(self, state: ToMBeliefState,
             horizon: Optional[int] = None) -> Tuple[Categorical, PlanTree]:
        check_belief(state.focal, self.focal_model)
        check_belief(state.other, self.other_model)
        if horizon is None:
            depth = self.config.resolve_horizon(self.focal_model.horizon)
        elif isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
            raise InvalidHorizonError(horizon)
        else:
            depth = horizon
        value, posterior, other_nodes = self.expand(state, depth)
        root = PlanNode(kind=NodeKind.BELIEF, owner=Owner.FOCAL, step=STEP_BACKWARD_PASS,
                        depth=depth, efe=value, belief=state.focal, other_belief=state.other,
                        children=other_nodes)
        logger.debug("joint plan for %s to depth %d: posterior %s (%d joint, %d other cache hits)",
                     self.focal_model.name, depth, posterior, self.cache.hits,
                     self.other_planner.cache.hits)
        return posterior, PlanTree(root=root, posterior=posterior,
                                   action_names=self.focal_model.actions, joint=True)


def tom_plan(state: ToMBeliefState, focal_model: GenerativeModel, other_model: GenerativeModel,
             config: Optional[ToMPlannerConfig] = None) -> Tuple[Categorical, PlanTree]:
    """Focal action posterior and the joint tree.

    Raises:
        InvalidHorizonError: the resolved horizon is below one.
        CorrespondenceGapError: a factor needed across perspectives is unmapped.
    """
    return TheoryOfMindPlanner(focal_model, other_model, config).plan(state)
