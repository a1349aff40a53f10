"""
Builders for the collision-avoidance and foraging generative models, the
focal agent's model of the other agent, and the factor correspondence that
links the two perspectives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..inference.belief import Categorical
from ..utils.errors import BadCellError
from .generative_model import (
    FactorSpec,
    GenerativeModel,
    ModalitySpec,
    Preferences,
    ensure_valid,
)
from .grid import COLLISION_ACTIONS, FORAGING_ACTIONS, Grid

logger = logging.getLogger(__name__)

ROLES = ('focal', 'other')
TASKS = ('collision', 'foraging')

# Collision models keep the null state at index 0; cell c is index c.
NULL_STATE = 0
ITEM_STATES = ('apple', 'empty')
ITEM_OUTCOMES = ('wasteland', 'apple', 'empty')
REWARD_STATES = ('none', 'received')

APPLE, EMPTY = 0, 1
WASTELAND_OUTCOME, APPLE_OUTCOME, EMPTY_OUTCOME = 0, 1, 2
NO_REWARD, REWARD = 0, 1


def _check_role(role: str) -> None:
    if role not in ROLES:
        raise ValueError(f"agent_role must be one of {ROLES}, got {role!r}")


def _identity_modality(name: str, factor: int, size: int,
                       labels: Optional[Tuple[str, ...]] = None) -> ModalitySpec:
    return ModalitySpec(name, size, (factor,), np.eye(size), labels)


def _uniform_walk(grid: Grid, actions: Sequence[str], offset: int, size: int) -> np.ndarray:
    """Uncontrolled location transition: uniform over cells reachable by a valid action.

    ``offset`` is the state index of cell 1 (1 when a null state sits at 0).
    """
    table = np.zeros((size, size, 1))
    for state in range(size):
        if state < offset:
            table[state, state, 0] = 1.0
            continue
        successors = grid.reachable(state - offset + 1, actions)
        for cell in successors:
            table[cell - 1 + offset, state, 0] = 1.0 / len(successors)
    return table


# ---------------------------------------------------------------------------
# Collision avoidance
# ---------------------------------------------------------------------------

def build_collision_model(agent_role: str, goal_cell: int, *,
                          grid: Optional[Grid] = None,
                          actions: Sequence[str] = COLLISION_ACTIONS,
                          other_actions: Optional[Sequence[str]] = None,
                          start_cell: Optional[int] = None,
                          other_cell: Optional[int] = None,
                          goal_preference: float = 10.0,
                          null_preference: float = -100.0,
                          horizon: int = 3) -> GenerativeModel:
    """Two-factor location model for the swap-corners task.

    Factors are the agent's own location and the other agent's location, each
    over every cell plus a null state. Own moves are deterministic: leaving
    the grid enters the absorbing null state, and an agent sharing a cell
    with the other stays put (stuck). The other's location follows a uniform
    walk over the cells its valid actions reach.

    Args:
        agent_role: 'focal' or 'other'; only used to name the model.
        goal_cell: cell carrying the goal preference.
        grid: grid geometry, 3x3 by default.
        actions: the agent's action repertoire.
        other_actions: repertoire assumed for the other's uniform walk.
        start_cell: optional delta prior on the own location.
        other_cell: optional delta prior on the other's location.

    Raises:
        BadCellError: a cell is outside the grid.
    """
    _check_role(agent_role)
    grid = grid or Grid()
    grid.check_cell(goal_cell)
    other_actions = tuple(other_actions or actions)
    size = grid.cell_count + 1
    labels = ('null',) + tuple(str(c) for c in grid.cells)

    own = np.zeros((size, size, size, len(actions)))
    for state in range(size):
        for other in range(size):
            for a, name in enumerate(actions):
                if state == NULL_STATE:
                    nxt = NULL_STATE
                elif other == state:
                    nxt = state
                else:
                    dest = grid.move(state, name)
                    nxt = NULL_STATE if dest is None else dest
                own[nxt, state, other, a] = 1.0

    factors = (
        FactorSpec('own_location', size, (1,), True, own, labels),
        FactorSpec('other_location', size, (), False,
                   _uniform_walk(grid, other_actions, 1, size), labels),
    )
    modalities = (
        _identity_modality('own_location', 0, size, labels),
        _identity_modality('other_location', 1, size, labels),
    )
    c_own = np.zeros(size)
    c_own[goal_cell] = goal_preference
    c_own[NULL_STATE] = null_preference
    preferences = Preferences((c_own, np.zeros(size)))

    def location_prior(cell: Optional[int]) -> Categorical:
        if cell is None:
            probs = np.full(size, 1.0 / grid.cell_count)
            probs[NULL_STATE] = 0.0
            return Categorical(probs)
        return Categorical.delta(size, grid.check_cell(cell))

    model = GenerativeModel(
        name=f"collision-{agent_role}-goal{goal_cell}",
        factors=factors,
        modalities=modalities,
        preferences=preferences,
        priors=(location_prior(start_cell), location_prior(other_cell)),
        actions=tuple(actions),
        horizon=horizon,
        self_factors=(0,),
    )
    logger.debug("built %s: %d factors, %d modalities", model.name, len(model.factors),
                 len(model.modalities))
    return ensure_valid(model)


# ---------------------------------------------------------------------------
# Foraging
# ---------------------------------------------------------------------------

def build_foraging_model(agent_role: str, start_cell: int, *,
                         grid: Optional[Grid] = None,
                         actions: Sequence[str] = FORAGING_ACTIONS,
                         other_actions: Optional[Sequence[str]] = None,
                         other_cell: Optional[int] = None,
                         known_apples: Sequence[int] = (9,),
                         spawn_probability: float = 0.25,
                         reward_preference: float = 10.0,
                         horizon: int = 3) -> GenerativeModel:
    """Orchard model: locations, per-step reward feedback and one item factor
    per orchard cell.

    The item modality reports what lies at the agent's own cell: wasteland
    off the orchard rows, otherwise the state of that cell's item factor.
    Empty orchard cells grow an apple with ``spawn_probability`` per step;
    an apple only disappears when the agent eats it, which also yields the
    reward. Invalid moves leave the agent where it is. The other agent's
    location follows a uniform walk over the cells ``other_actions`` (the
    agent's own repertoire by default) reach.

    Raises:
        BadCellError: a cell is outside the grid or a known apple is not on
            an orchard cell.
    """
    _check_role(agent_role)
    grid = grid or Grid()
    grid.check_cell(start_cell)
    orchard = grid.orchard_cells()
    for cell in known_apples:
        grid.check_cell(cell)
        if cell not in orchard:
            raise BadCellError(cell, grid.cell_count)
    other_actions = tuple(other_actions or actions)
    n_cells = grid.cell_count
    n_items = len(orchard)
    item_factor = {cell: 3 + i for i, cell in enumerate(orchard)}
    eat = actions.index('eat') if 'eat' in actions else None
    cell_labels = tuple(str(c) for c in grid.cells)

    own = np.zeros((n_cells, n_cells, len(actions)))
    for state in range(n_cells):
        for a, name in enumerate(actions):
            dest = grid.move(state + 1, name)
            own[(state if dest is None else dest - 1), state, a] = 1.0

    # reward: parents own location then every item factor
    reward_shape = (2, 2, n_cells) + (2,) * n_items + (len(actions),)
    reward = np.zeros(reward_shape)
    reward[NO_REWARD] = 1.0
    if eat is not None:
        for cell, factor in item_factor.items():
            index = [slice(None), slice(None), cell - 1] + [slice(None)] * n_items + [eat]
            index[3 + (factor - 3)] = APPLE
            reward[tuple(index)] = 0.0
            index[0] = REWARD
            reward[tuple(index)] = 1.0

    factors: List[FactorSpec] = [
        FactorSpec('own_location', n_cells, (), True, own, cell_labels),
        FactorSpec('other_location', n_cells, (), False,
                   _uniform_walk(grid, other_actions, 0, n_cells), cell_labels),
        FactorSpec('own_reward', 2, (0,) + tuple(item_factor.values()), True, reward,
                   REWARD_STATES),
    ]
    for cell in orchard:
        item = np.zeros((2, 2, n_cells, len(actions)))
        item[APPLE, APPLE] = 1.0
        item[APPLE, EMPTY] = spawn_probability
        item[EMPTY, EMPTY] = 1.0 - spawn_probability
        if eat is not None:
            item[APPLE, APPLE, cell - 1, eat] = 0.0
            item[EMPTY, APPLE, cell - 1, eat] = 1.0
        factors.append(FactorSpec(f'item_{cell}', 2, (0,), True, item, ITEM_STATES))

    item_lik = np.zeros((3, n_cells) + (2,) * n_items)
    for cell in grid.cells:
        if cell not in item_factor:
            item_lik[WASTELAND_OUTCOME, cell - 1] = 1.0
            continue
        axis = item_factor[cell] - 3
        for state, outcome in ((APPLE, APPLE_OUTCOME), (EMPTY, EMPTY_OUTCOME)):
            index = [outcome, cell - 1] + [slice(None)] * n_items
            index[2 + axis] = state
            item_lik[tuple(index)] = 1.0

    modalities = (
        _identity_modality('own_location', 0, n_cells, cell_labels),
        _identity_modality('other_location', 1, n_cells, cell_labels),
        ModalitySpec('item', 3, (0,) + tuple(item_factor.values()), item_lik, ITEM_OUTCOMES),
        _identity_modality('reward', 2, 2, REWARD_STATES),
    )
    preferences = Preferences((
        np.zeros(n_cells),
        np.zeros(n_cells),
        np.zeros(3),
        np.array([0.0, reward_preference]),
    ))

    priors: List[Categorical] = [
        Categorical.delta(n_cells, start_cell - 1),
        (Categorical.delta(n_cells, grid.check_cell(other_cell) - 1)
         if other_cell is not None else Categorical.uniform(n_cells)),
        Categorical.delta(2, NO_REWARD),
    ]
    for cell in orchard:
        priors.append(Categorical.delta(2, APPLE) if cell in known_apples
                      else Categorical.uniform(2))

    model = GenerativeModel(
        name=f"foraging-{agent_role}-start{start_cell}",
        factors=tuple(factors),
        modalities=modalities,
        preferences=preferences,
        priors=tuple(priors),
        actions=tuple(actions),
        horizon=horizon,
        self_factors=(0, 2),
    )
    logger.debug("built %s: %d factors, %d modalities", model.name, len(model.factors),
                 len(model.modalities))
    return ensure_valid(model)


# ---------------------------------------------------------------------------
# Perspective taking
# ---------------------------------------------------------------------------

def _counterpart_name(name: str) -> str:
    if name.startswith('own_'):
        return 'other_' + name[len('own_'):]
    if name.startswith('other_'):
        return 'own_' + name[len('other_'):]
    return name


@dataclass(frozen=True)
class Correspondence:
    """Bijection between focal-model factors and other-model factors.

    ``pairs`` holds (focal factor index, other factor index). Factors are
    matched by name with own_* and other_* swapped; factors without a
    counterpart (e.g. the other's reward feedback) are simply unmapped.
    """

    pairs: Tuple[Tuple[int, int], ...]

    @classmethod
    def between(cls, focal: GenerativeModel, other: GenerativeModel) -> "Correspondence":
        other_names = {f.name: j for j, f in enumerate(other.factors)}
        pairs = []
        for i, factor in enumerate(focal.factors):
            j = other_names.get(_counterpart_name(factor.name))
            if j is not None:
                pairs.append((i, j))
        return cls(tuple(pairs))

    @property
    def focal_to_other(self) -> Dict[int, int]:
        return dict(self.pairs)

    @property
    def other_to_focal(self) -> Dict[int, int]:
        return {j: i for i, j in self.pairs}

    def other_of(self, focal_factor: int) -> Optional[int]:
        return self.focal_to_other.get(focal_factor)

    def focal_of(self, other_factor: int) -> Optional[int]:
        return self.other_to_focal.get(other_factor)

    def violations(self, focal: GenerativeModel, other: GenerativeModel) -> List[str]:
        problems = []
        focal_side = [i for i, _ in self.pairs]
        other_side = [j for _, j in self.pairs]
        if len(set(focal_side)) != len(focal_side) or len(set(other_side)) != len(other_side):
            problems.append("correspondence is not one-to-one")
        for i, j in self.pairs:
            if not (0 <= i < len(focal.factors) and 0 <= j < len(other.factors)):
                problems.append(f"pair ({i}, {j}) out of range")
                continue
            if focal.factors[i].state_count != other.factors[j].state_count:
                problems.append(f"'{focal.factors[i].name}' and '{other.factors[j].name}' "
                                "differ in cardinality")
        return problems


def model_of_other(task: str, other_goal_or_prefs: Union[int, float, None] = None,
                   **kwargs: object) -> GenerativeModel:
    """Generative model attributed to the other agent.

    For the collision task ``other_goal_or_prefs`` is the other's goal cell;
    for foraging it is the other's reward preference (defaults to the
    focal's). The model is written from the other's point of view: its
    own_location is the focal agent's other_location. Remaining keyword
    arguments go to the task builder (start cells, grid, constants).
    """
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    if task == 'collision':
        if other_goal_or_prefs is None:
            raise ValueError("collision model of other needs the other's goal cell")
        return build_collision_model('other', int(other_goal_or_prefs), **kwargs)  # type: ignore[arg-type]
    start = kwargs.pop('start_cell', None)
    if start is None:
        raise ValueError("foraging model of other needs the other's start_cell")
    if other_goal_or_prefs is not None:
        kwargs['reward_preference'] = float(other_goal_or_prefs)
    return build_foraging_model('other', int(start), **kwargs)  # type: ignore[arg-type]
