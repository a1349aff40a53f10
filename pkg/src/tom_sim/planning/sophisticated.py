"""
Sophisticated-inference tree search.

The expected free energy of an action is the expectation, over the outcomes
it predicts, of the outcome's utility minus the information it carries
about hidden states, plus the value of acting well after seeing it::

    G(a) = sum_o p(o | a) [ u(o) - ig(o) + sum_a' Q(a' | o) G(a' | o) ]

with u(o) = -ln softmax(C)[o] summed over modalities, ig(o) the KL
divergence of the posterior from the predicted belief summed over factors,
and Q = softmax(-G / T) at every node.

At each belief node the actions are first scored one step ahead; actions
whose one-step posterior falls under the policy threshold are pruned
(the best one always survives) and the survivors are expanded to the full
depth. Outcomes under the observation threshold are pruned the same way
and the remaining probabilities renormalized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..inference.belief import (
    Categorical,
    FactoredBelief,
    bayes_update,
    kl_divergence,
    softmax_neg,
)
from ..model.generative_model import GenerativeModel, joint_outcomes, outcome_label
from ..utils.errors import InvalidHorizonError, SupportMismatchError, ZeroMassError
from .config import PlannerConfig
from .tree import NodeKind, Owner, PlanNode, PlanTree

logger = logging.getLogger(__name__)

SELECTION_MODES = ('argmax', 'sample')


@dataclass(frozen=True)
class OutcomeEvaluation:
    """One retained joint outcome of an action, one step ahead."""

    outcome: Tuple[int, ...]
    probability: float
    utility: float
    info_gain: float
    posterior: FactoredBelief

    @property
    def immediate_efe(self) -> float:
        return self.utility - self.info_gain


def prune_policies(posterior: Categorical, threshold: float) -> Dict[int, float]:
    """Actions whose probability reaches ``threshold``, renormalized.

    The most probable action (lowest index on ties) is always retained.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    best = posterior.argmax()
    kept = [a for a, p in enumerate(posterior.probs) if (p >= threshold and p > 0.0) or a == best]
    total = float(sum(posterior.probs[a] for a in kept))
    return {a: float(posterior.probs[a]) / total for a in kept}


def prune_observations(outcomes: Sequence[Tuple[Tuple[int, ...], float]],
                       threshold: float) -> List[Tuple[Tuple[int, ...], float]]:
    """Outcomes whose probability reaches ``threshold``, renormalized.

    Order is preserved; the most probable outcome (first on ties) is always kept.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    if not outcomes:
        return []
    best = max(range(len(outcomes)), key=lambda i: (outcomes[i][1], -i))
    kept = [(o, p) for i, (o, p) in enumerate(outcomes)
            if (p >= threshold and p > 0.0) or i == best]
    total = sum(p for _, p in kept)
    return [(o, p / total) for o, p in kept]


def evaluate_outcomes(predicted: FactoredBelief, model: GenerativeModel,
                      threshold: float = 0.0,
                      marginals: Optional[Sequence[Categorical]] = None,
                      prior: Optional[FactoredBelief] = None) -> List[OutcomeEvaluation]:
    """Utility, information gain and posterior of every retained outcome.

    ``marginals`` overrides the predictive outcome distribution (used when
    another perspective predicts what this model will observe) and
    ``prior`` the belief the posterior is computed from. Outcomes that are
    impossible under ``prior`` are dropped and the rest renormalized.
    """
    prior = predicted if prior is None else prior
    if marginals is None:
        marginals = model.expected_outcomes(predicted)
    retained = prune_observations(joint_outcomes(marginals), threshold)
    evaluations = []
    for outcome, probability in retained:
        try:
            posterior = bayes_update(prior, model.likelihood_slices(outcome))
        except ZeroMassError:
            logger.debug("dropping outcome %s: impossible under the prior", outcome)
            continue
        utility = sum(model.utility(m, o) for m, o in enumerate(outcome))
        info_gain = sum(kl_divergence(posterior[f], prior[f]) for f in range(len(prior)))
        evaluations.append(OutcomeEvaluation(outcome, probability, utility, info_gain, posterior))
    if not evaluations:
        raise ZeroMassError('evaluate_outcomes')
    if len(evaluations) < len(retained):
        total = sum(e.probability for e in evaluations)
        evaluations = [OutcomeEvaluation(e.outcome, e.probability / total, e.utility,
                                         e.info_gain, e.posterior) for e in evaluations]
    return evaluations


def efe_one_step(belief: FactoredBelief, action: int, model: GenerativeModel,
                 threshold: float = 0.0) -> List[OutcomeEvaluation]:
    """Predict under ``action`` and evaluate the outcomes one step ahead."""
    if not 0 <= action < model.action_count:
        raise ValueError(f"action {action} not valid for model '{model.name}'")
    return evaluate_outcomes(model.predict(belief, action), model, threshold)


def expected_immediate_efe(evaluations: Sequence[OutcomeEvaluation]) -> float:
    return float(sum(e.probability * e.immediate_efe for e in evaluations))


def check_belief(belief: FactoredBelief, model: GenerativeModel) -> None:
    expected = tuple(f.state_count for f in model.factors)
    if belief.cardinalities != expected:
        raise SupportMismatchError(f"belief for model '{model.name}'", expected,
                                   belief.cardinalities)


def posterior_over(values: Dict[int, float], action_count: int,
                   temperature: float) -> Categorical:
    """softmax(-G / T) over the evaluated actions; the rest get zero."""
    actions = sorted(values)
    q = softmax_neg([values[a] for a in actions], temperature)
    probs = np.zeros(action_count)
    probs[actions] = q.probs
    return Categorical(probs)


@dataclass
class SearchCache:
    """Subtrees already solved within one planning context, keyed on
    (belief bytes, remaining depth), and one-step outcome evaluations keyed
    on (belief bytes, action)."""

    entries: Dict[Tuple[bytes, int], Tuple[float, Categorical, List[PlanNode]]] = \
        field(default_factory=dict)
    outcomes: Dict[Tuple[bytes, int], List[OutcomeEvaluation]] = field(default_factory=dict)
    hits: int = 0
    outcome_hits: int = 0


class SophisticatedPlanner:
    """Recursive tree search for one model and configuration."""

    def __init__(self, model: GenerativeModel, config: Optional[PlannerConfig] = None,
                 owner: Owner = Owner.FOCAL, cache: Optional[SearchCache] = None):
        self.model = model
        self.config = (config or PlannerConfig()).validate()
        self.owner = owner
        self.cache = cache if cache is not None else SearchCache()

    def one_step(self, belief: FactoredBelief, action: int,
                 key: Optional[bytes] = None) -> List[OutcomeEvaluation]:
        """Memoised :func:`efe_one_step` under this planner's observation threshold."""
        memo_key = (belief.key() if key is None else key, action)
        cached = self.cache.outcomes.get(memo_key)
        if cached is not None:
            self.cache.outcome_hits += 1
            return cached
        evaluations = efe_one_step(belief, action, self.model,
                                   self.config.observation_prune_threshold)
        self.cache.outcomes[memo_key] = evaluations
        return evaluations

    def expand(self, belief: FactoredBelief,
               depth: int) -> Tuple[float, Categorical, List[PlanNode]]:
        """Value, action posterior and policy nodes of a belief with ``depth`` steps left."""
        belief_key = belief.key()
        key = (belief_key, depth)
        cached = self.cache.entries.get(key)
        if cached is not None:
            self.cache.hits += 1
            return cached

        model, config = self.model, self.config
        one_step = {a: self.one_step(belief, a, belief_key) for a in range(model.action_count)}
        preliminary = posterior_over({a: expected_immediate_efe(e) for a, e in one_step.items()},
                                     model.action_count, config.temperature)
        retained = prune_policies(preliminary, config.policy_prune_threshold)

        values: Dict[int, float] = {}
        policy_nodes: List[PlanNode] = []
        for action in sorted(retained):
            observation_nodes = []
            for evaluation in one_step[action]:
                efe = evaluation.immediate_efe
                children: List[PlanNode] = []
                if depth > 1:
                    future, _, children = self.expand(evaluation.posterior, depth - 1)
                    efe += future
                observation_nodes.append(PlanNode(
                    kind=NodeKind.OBSERVATION, owner=self.owner, depth=depth,
                    efe=efe, probability=evaluation.probability,
                    outcome=evaluation.outcome,
                    outcome_label=outcome_label(model, evaluation.outcome),
                    belief=evaluation.posterior, children=children,
                ))
            values[action] = float(sum(n.probability * n.efe for n in observation_nodes))
            policy_nodes.append(PlanNode(
                kind=NodeKind.POLICY, owner=self.owner, depth=depth,
                efe=values[action], action=action, action_name=model.actions[action],
                children=observation_nodes,
            ))

        posterior = posterior_over(values, model.action_count, config.temperature)
        for node in policy_nodes:
            node.probability = posterior[node.action]  # type: ignore[index]
        value = float(sum(posterior[a] * g for a, g in values.items()))
        result = (value, posterior, policy_nodes)
        self.cache.entries[key] = result
        return result

    def plan(self, belief: FactoredBelief,
             horizon: Optional[int] = None) -> Tuple[Categorical, PlanTree]:
        check_belief(belief, self.model)
        if horizon is None:
            depth = self.config.resolve_horizon(self.model.horizon)
        elif isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
            raise InvalidHorizonError(horizon)
        else:
            depth = horizon
        value, posterior, policy_nodes = self.expand(belief, depth)
        root = PlanNode(kind=NodeKind.BELIEF, owner=self.owner, depth=depth, efe=value,
                        belief=belief, children=policy_nodes)
        logger.debug("planned %s to depth %d: posterior %s (%d cache hits)",
                     self.model.name, depth, posterior, self.cache.hits)
        return posterior, PlanTree(root=root, posterior=posterior,
                                   action_names=self.model.actions)


def plan(belief: FactoredBelief, model: GenerativeModel,
         config: Optional[PlannerConfig] = None) -> Tuple[Categorical, PlanTree]:
    """Action posterior and full search tree for ``belief`` under ``model``.

    Raises:
        InvalidHorizonError: the resolved horizon is below one.
    """
    return SophisticatedPlanner(model, config).plan(belief)


def select_action(posterior: Categorical, mode: str = 'argmax',
                  rng_seed: Optional[object] = None) -> int:
    """Pick an action: argmax with lowest-index ties, or a seeded sample."""
    if mode == 'argmax':
        return posterior.argmax()
    if mode == 'sample':
        rng = np.random.default_rng(rng_seed)  # type: ignore[arg-type]
        return int(rng.choice(len(posterior), p=posterior.probs))
    raise ValueError(f"mode must be one of {SELECTION_MODES}, got {mode!r}")
