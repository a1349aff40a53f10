"""
Agents: filter observations into beliefs, plan, act.

An :class:`SIAgent` plans with sophisticated inference over its own model.
A :class:`ToMAgent` additionally tracks the belief it attributes to the
other agent and plans over joint policies.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..environment.grid_world import AGENTS, AgentObservation, TaskConfig
from ..inference.belief import (
    Categorical,
    FactoredBelief,
    bayes_update,
    expected_observation,
    smooth,
)
from ..model.builders import (
    APPLE_OUTCOME,
    EMPTY_OUTCOME,
    NULL_STATE,
    REWARD,
    NO_REWARD,
    WASTELAND_OUTCOME,
    build_collision_model,
    build_foraging_model,
    model_of_other,
)
from ..model.generative_model import GenerativeModel
from ..planning.config import PlannerConfig, ToMPlannerConfig
from ..planning.sophisticated import SophisticatedPlanner, select_action
from ..planning.theory_of_mind import TheoryOfMindPlanner, ToMBeliefState
from ..planning.tree import PlanTree
from ..utils.errors import ZeroMassError
from ..utils.logger import TomSimLogger

PLANNER_KINDS = ('si', 'tom')
# Expected observations at least this sharp are treated as seen by the other.
CERTAIN_OBSERVATION = 0.999

_ITEM_OUTCOMES = {'wasteland': WASTELAND_OUTCOME, 'apple': APPLE_OUTCOME,
                  'empty': EMPTY_OUTCOME}


def build_agent_model(config: TaskConfig, agent: int, role: str = 'focal') -> GenerativeModel:
    """Model agent ``agent`` (0 red, 1 purple) plans with.

    With ``role='other'`` it is the model the opposite agent attributes to it.
    """
    me, them = config.starts[agent], config.starts[1 - agent]
    grid = config.grid
    if config.task == 'collision':
        goal = config.goals[agent]
        if role == 'other':
            return model_of_other('collision', goal, grid=grid, start_cell=me, other_cell=them,
                                  goal_preference=config.goal_preference,
                                  null_preference=config.null_preference,
                                  horizon=config.model_horizon)
        return build_collision_model(role, goal, grid=grid,  # type: ignore[arg-type]
                                     start_cell=me, other_cell=them,
                                     goal_preference=config.goal_preference,
                                     null_preference=config.null_preference,
                                     horizon=config.model_horizon)
    if role == 'other':
        return model_of_other('foraging', config.reward_preference, start_cell=me, grid=grid,
                              other_cell=them, known_apples=tuple(config.known_apples),
                              spawn_probability=config.spawn_probability,
                              horizon=config.model_horizon)
    return build_foraging_model(role, me, grid=grid, other_cell=them,
                                known_apples=tuple(config.known_apples),
                                spawn_probability=config.spawn_probability,
                                reward_preference=config.reward_preference,
                                horizon=config.model_horizon)


def _has_null_state(model: GenerativeModel) -> bool:
    labels = model.modalities[model.modality_index('own_location')].outcome_labels
    return bool(labels) and labels[0] == 'null'  # type: ignore[index]


def observation_outcome(observation: AgentObservation, model: GenerativeModel) -> Tuple[int, ...]:
    """Outcome indices of an observation, in the model's modality order."""
    outcome = []
    null_offset = 1 if _has_null_state(model) else 0
    for modality in model.modalities:
        if modality.name == 'own_location':
            if null_offset and observation.null:
                outcome.append(NULL_STATE)
            else:
                outcome.append(observation.own_cell - 1 + null_offset)
        elif modality.name == 'other_location':
            outcome.append(observation.other_cell - 1 + null_offset)
        elif modality.name == 'item':
            outcome.append(_ITEM_OUTCOMES[observation.item or 'wasteland'])
        elif modality.name == 'reward':
            outcome.append(REWARD if observation.reward else NO_REWARD)
        else:
            raise KeyError(f"no observation channel for modality '{modality.name}'")
    return tuple(outcome)


def filter_belief(prior: FactoredBelief, model: GenerativeModel, outcome: Tuple[int, ...],
                  logger: Optional[TomSimLogger] = None) -> FactoredBelief:
    """Bayes update; an observation the prior rules out is retried on a smoothed prior."""
    slices = model.likelihood_slices(outcome)
    try:
        return bayes_update(prior, slices)
    except ZeroMassError:
        if logger:
            logger.warning(f"{model.name}: observation {outcome} ruled out by the prediction; "
                           "retrying on a smoothed belief")
        return bayes_update(smooth(prior), slices)


@dataclass
class PlanCache:
    """Plans keyed on the planner's identity and the exact beliefs.

    Only posteriors are kept unless ``keep_trees`` is set; the oldest entry
    is evicted once ``max_entries`` is reached.
    """

    keep_trees: bool = False
    max_entries: int = 4096
    entries: Dict[Tuple[str, bytes], Tuple[Categorical, Optional[PlanTree]]] = \
        field(default_factory=dict)
    hits: int = 0
    misses: int = 0

    def get(self, key: Tuple[str, bytes]) -> Optional[Tuple[Categorical, Optional[PlanTree]]]:
        result = self.entries.get(key)
        if result is None:
            self.misses += 1
        else:
            self.hits += 1
        return result

    def put(self, key: Tuple[str, bytes], result: Tuple[Categorical, PlanTree]) -> None:
        posterior, tree = result
        if key not in self.entries and len(self.entries) >= self.max_entries:
            del self.entries[next(iter(self.entries))]
        self.entries[key] = (posterior, tree if self.keep_trees else None)


class SIAgent:
    """Agent planning with sophisticated inference over its own model."""

    kind = 'si'

    def __init__(self, name: str, model: GenerativeModel,
                 config: Optional[PlannerConfig] = None,
                 selection: str = 'argmax', cache: Optional[PlanCache] = None):
        self.name = name
        self.model = model
        self.config = (config or PlannerConfig()).validate()
        self.selection = selection
        self.cache = cache
        self.logger = TomSimLogger(f'tom_sim.Agent.{name}')
        self.belief = model.prior_belief()
        self.last_action: Optional[int] = None
        self.last_posterior: Optional[Categorical] = None
        self.last_tree: Optional[PlanTree] = None
        self._planner = SophisticatedPlanner(model, self.config)

    @property
    def signature(self) -> str:
        return f"{self.kind}:{self.model.name}:{self.config.to_json()}"  # type: ignore[attr-defined]

    def _belief_key(self) -> bytes:
        return self.belief.key()

    def update(self, observation: AgentObservation) -> None:
        """Filter the observation that followed ``last_action`` (or the first one)."""
        prior = self.belief
        if self.last_action is not None:
            prior = self.model.predict(prior, self.last_action)
        self.belief = filter_belief(prior, self.model, observation_outcome(observation, self.model),
                                    self.logger)

    def _plan(self) -> Tuple[Categorical, PlanTree]:
        return self._planner.plan(self.belief)

    def plan(self) -> Tuple[Categorical, Optional[PlanTree]]:
        """Action posterior and tree; the tree is None for a plan the cache
        served without keeping trees."""
        key = (self.signature, self._belief_key())
        cached = self.cache.get(key) if self.cache is not None else None
        if cached is None:
            cached = self._plan()
            if self.cache is not None:
                self.cache.put(key, cached)
        self.last_posterior, self.last_tree = cached
        return cached

    def act(self, rng_seed: Optional[object] = None) -> str:
        posterior, _ = self.plan()
        action = select_action(posterior, self.selection, rng_seed)
        self.last_action = action
        self.logger.debug(f"{self.name} chose {self.model.actions[action]} "
                          f"(p={posterior[action]:.3f})")
        return self.model.actions[action]


class ToMAgent(SIAgent):
    """Agent planning over joint policies with a model of the other agent."""

    kind = 'tom'

    def __init__(self, name: str, model: GenerativeModel, other_model: GenerativeModel,
                 config: Optional[ToMPlannerConfig] = None,
                 selection: str = 'argmax', cache: Optional[PlanCache] = None):
        super().__init__(name, model, config or ToMPlannerConfig(), selection, cache)
        self.other_model = other_model
        self.state = ToMBeliefState.from_models(model, other_model)
        self._joint_planner = TheoryOfMindPlanner(model, other_model,
                                                  self.config)  # type: ignore[arg-type]

    @property
    def signature(self) -> str:
        return f"{super().signature}:{self.other_model.name}"

    def _belief_key(self) -> bytes:
        return self.belief.key() + b'||' + self.state.other.key()

    def _predict_other(self) -> FactoredBelief:
        """The other's belief after an unknown action: the uniform mixture over its actions."""
        other = self.state.other
        if self.last_action is None:
            return other
        predictions = [self.other_model.predict(other, a)
                       for a in range(self.other_model.action_count)]
        return FactoredBelief(tuple(
            Categorical(np.mean([p[f].probs for p in predictions], axis=0))
            for f in range(len(other))
        ))

    def _update_other(self, predicted: FactoredBelief) -> FactoredBelief:
        """Condition the attributed belief on what the other must have seen."""
        corr = self.state.correspondence
        paired = []
        for j in range(len(predicted)):
            i = corr.focal_of(j)
            paired.append(self.belief[i] if i is not None else predicted[j])
        pairing = FactoredBelief(tuple(paired))
        slices = []
        for modality in self.other_model.modalities:
            expected = expected_observation(pairing, modality.likelihood, modality.parent_factors)
            if expected.probs.max() >= CERTAIN_OBSERVATION:
                slices.append(modality.slice(expected.argmax()))
        if not slices:
            return predicted
        try:
            return bayes_update(predicted, slices)
        except ZeroMassError:
            self.logger.warning(f"{self.name}: attributed belief ruled out what the other "
                                "sees; retrying on a smoothed belief")
            return bayes_update(smooth(predicted), slices)

    def update(self, observation: AgentObservation) -> None:
        other_predicted = self._predict_other()
        super().update(observation)
        self.state = self.state.with_beliefs(self.belief, self._update_other(other_predicted))

    def _plan(self) -> Tuple[Categorical, PlanTree]:
        return self._joint_planner.plan(self.state)


def make_agent(config: TaskConfig, agent: int, kind: str,
               planner_config: Optional[PlannerConfig] = None, selection: str = 'argmax',
               cache: Optional[PlanCache] = None, name: Optional[str] = None) -> SIAgent:
    """Build the SI or ToM agent playing ``agent`` (0 red, 1 purple)."""
    name = name or AGENTS[agent]
    model = build_agent_model(config, agent)
    if kind == 'si':
        return SIAgent(name, model, planner_config, selection, cache)
    if kind == 'tom':
        if planner_config is not None and not isinstance(planner_config, ToMPlannerConfig):
            planner_config = ToMPlannerConfig(**planner_config.to_dict())  # type: ignore[attr-defined]
        other_model = build_agent_model(config, 1 - agent, role='other')
        return ToMAgent(name, model, other_model, planner_config,  # type: ignore[arg-type]
                        selection, cache)
    raise ValueError(f"planner kind must be one of {PLANNER_KINDS}, got {kind!r}")
