"""
Two-agent gridworld simulator.

Both agents move simultaneously on a numbered grid (see ``model.grid``).
In the collision task agents that end a step on the same cell are stuck
there for good. In the foraging task apples sit on the orchard rows; an
agent eating at an apple cell consumes it and is rewarded, a seeded coin
decides when both eat the same apple, and empty orchard cells regrow with
a fixed probability per step. Observations are exact.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from ..model.builders import TASKS
from ..model.grid import COLLISION_ACTIONS, FORAGING_ACTIONS, Grid
from ..utils.errors import BadCellError, ConfigError, TerminalStateError

AGENTS = ('red', 'purple')
RED, PURPLE = 0, 1


@dataclass_json
@dataclass
class TaskConfig:
    """Task constants shared by the environment and the agents' models."""

    task: str = 'collision'

    # Grid
    width: int = 3
    height: int = 3

    # Agents
    red_start: int = 1
    purple_start: int = 9
    red_goal: Optional[int] = 9
    purple_goal: Optional[int] = 1

    # Preferences (nats)
    goal_preference: float = 10.0
    null_preference: float = -100.0
    reward_preference: float = 10.0

    # Orchard
    known_apples: List[int] = field(default_factory=lambda: [9])
    spawn_probability: float = 0.25
    initial_spawn: bool = False

    # Dynamics
    stick_on_collision: bool = True
    swap_is_collision: bool = False

    # Episode
    model_horizon: int = 3
    step_cap: int = 12

    @classmethod
    def collision(cls) -> "TaskConfig":
        return cls()

    @classmethod
    def foraging(cls) -> "TaskConfig":
        return cls(task='foraging', red_start=8, purple_start=6, red_goal=None,
                   purple_goal=None, stick_on_collision=False)

    @property
    def grid(self) -> Grid:
        return Grid(self.width, self.height)

    @property
    def actions(self) -> Tuple[str, ...]:
        return COLLISION_ACTIONS if self.task == 'collision' else FORAGING_ACTIONS

    @property
    def starts(self) -> Tuple[int, int]:
        return self.red_start, self.purple_start

    @property
    def goals(self) -> Tuple[Optional[int], Optional[int]]:
        return self.red_goal, self.purple_goal

    def orchard(self) -> Tuple[int, ...]:
        if self.task != 'foraging':
            return ()
        return tuple(self.grid.orchard_cells())

    def violations(self) -> List[str]:
        problems = []
        if self.task not in TASKS:
            problems.append(f"task={self.task!r} must be one of {TASKS}")
            return problems
        if self.width < 1 or self.height < 1:
            problems.append(f"grid {self.width}x{self.height} must be at least 1x1")
            return problems
        cells = range(1, self.width * self.height + 1)
        for name in ('red_start', 'purple_start'):
            if getattr(self, name) not in cells:
                problems.append(f"{name}={getattr(self, name)!r} outside the grid")
        if self.task == 'collision':
            for name in ('red_goal', 'purple_goal'):
                if getattr(self, name) not in cells:
                    problems.append(f"{name}={getattr(self, name)!r} outside the grid")
        else:
            orchard = self.orchard()
            for cell in self.known_apples:
                if cell not in orchard:
                    problems.append(f"known apple {cell!r} is not an orchard cell")
        if not 0.0 <= self.spawn_probability <= 1.0:
            problems.append(f"spawn_probability={self.spawn_probability!r} outside [0, 1]")
        if self.model_horizon < 1:
            problems.append(f"model_horizon={self.model_horizon!r} must be >= 1")
        if self.step_cap < 1:
            problems.append(f"step_cap={self.step_cap!r} must be >= 1")
        return problems

    def validate(self) -> "TaskConfig":
        problems = self.violations()
        if problems:
            raise ConfigError('TaskConfig', problems)
        return self


@dataclass(frozen=True)
class GridWorldState:
    """Ground truth of one episode after ``step`` steps."""

    task: str
    step: int
    cells: Tuple[int, int]
    stuck: Tuple[bool, bool] = (False, False)
    # apple present, per orchard cell
    orchard: Tuple[int, ...] = ()
    apples: Tuple[bool, ...] = ()
    rewards: Tuple[int, int] = (0, 0)
    rewarded_now: Tuple[bool, bool] = (False, False)
    null_flags: Tuple[bool, bool] = (False, False)
    arrival_steps: Tuple[Optional[int], Optional[int]] = (None, None)
    path_lengths: Tuple[int, int] = (0, 0)
    collided: bool = False
    # agent that ate the first apple of each orchard cell
    first_eaters: Tuple[Optional[int], ...] = ()

    def apple_at(self, cell: int) -> Optional[bool]:
        """True/False on orchard cells, None elsewhere."""
        if cell in self.orchard:
            return self.apples[self.orchard.index(cell)]
        return None

    def item_label(self, cell: int) -> str:
        present = self.apple_at(cell)
        if present is None:
            return 'wasteland'
        return 'apple' if present else 'empty'

    def first_eater(self, cell: int) -> Optional[int]:
        if cell in self.orchard and self.first_eaters:
            return self.first_eaters[self.orchard.index(cell)]
        return None


@dataclass(frozen=True)
class JointAction:
    red: str
    purple: str

    def __iter__(self):
        return iter((self.red, self.purple))

    def check(self, actions: Tuple[str, ...]) -> "JointAction":
        for name in self:
            if name not in actions:
                raise ValueError(f"action {name!r} not in {actions}")
        return self


@dataclass(frozen=True)
class AgentObservation:
    own_cell: int
    other_cell: int
    null: bool = False
    item: Optional[str] = None
    reward: bool = False


@dataclass(frozen=True)
class ObservationBundle:
    red: AgentObservation
    purple: AgentObservation

    def __getitem__(self, agent: int) -> AgentObservation:
        return (self.red, self.purple)[agent]


@dataclass_json
@dataclass
class TraceRecord:
    """One environment step."""

    seed: int
    step: int
    actions: List[str]
    cells: List[int]
    stuck: List[bool]
    null_flags: List[bool]
    rewarded: List[bool]
    apples: Dict[str, bool] = field(default_factory=dict)


@dataclass_json
@dataclass
class OutcomeRecord:
    """How an episode ended."""

    task: str
    seed: int
    done: bool
    success: bool
    collision: bool
    steps: int
    rewards: List[int]
    fed: List[bool]
    arrival_steps: List[Optional[int]]
    path_lengths: List[int]
    condition: str = ''
    # per known apple, the agent that ate it (None while uneaten)
    known_apple_winners: List[Optional[int]] = field(default_factory=list)


def observe(state: GridWorldState) -> ObservationBundle:
    def view(agent: int) -> AgentObservation:
        own = state.cells[agent]
        return AgentObservation(
            own_cell=own,
            other_cell=state.cells[1 - agent],
            null=state.null_flags[agent],
            item=state.item_label(own) if state.task == 'foraging' else None,
            reward=state.rewarded_now[agent],
        )
    return ObservationBundle(view(RED), view(PURPLE))


def reset(config: TaskConfig, seed: int = 0) -> GridWorldState:
    """Canonical start of a task; unknown orchard cells are drawn only with ``initial_spawn``."""
    config.validate()
    orchard = config.orchard()
    rng = np.random.default_rng(seed)
    draws = rng.random(len(orchard))
    apples = tuple(
        cell in config.known_apples
        or (config.initial_spawn and bool(draws[i] < config.spawn_probability))
        for i, cell in enumerate(orchard)
    )
    return GridWorldState(task=config.task, step=0, cells=config.starts,
                          orchard=orchard, apples=apples, first_eaters=(None,) * len(orchard))


def is_done(state: GridWorldState, config: TaskConfig,
            seed: int = 0) -> Tuple[bool, OutcomeRecord]:
    """Termination flag and the outcome record of the state."""
    capped = state.step >= config.step_cap
    fed = [r > 0 for r in state.rewards]
    if state.task == 'collision':
        at_goals = all(cell == goal for cell, goal in zip(state.cells, config.goals))
        collision = any(state.stuck) or state.collided
        done = at_goals or collision or capped
        success = at_goals and not collision
    else:
        collision = state.collided
        success = all(fed)
        done = success or capped
    record = OutcomeRecord(
        task=state.task, seed=seed, done=done, success=success, collision=collision,
        steps=state.step, rewards=list(state.rewards), fed=fed,
        arrival_steps=list(state.arrival_steps), path_lengths=list(state.path_lengths),
        known_apple_winners=[state.first_eater(cell) for cell in config.known_apples
                             if cell in state.orchard],
    )
    return done, record


def step(state: GridWorldState, joint_action: JointAction, config: TaskConfig,
         rng_seed: object = None) -> Tuple[GridWorldState, ObservationBundle]:
    """Advance both agents one step.

    Raises:
        TerminalStateError: the state already satisfies is_done.
    """
    if is_done(state, config)[0]:
        raise TerminalStateError(state.task, state.step)
    joint_action.check(config.actions)
    grid = config.grid
    rng = np.random.default_rng(rng_seed)  # type: ignore[arg-type]
    for cell in state.cells:
        if not 1 <= cell <= grid.cell_count:
            raise BadCellError(cell, grid.cell_count)

    cells = list(state.cells)
    nulls = [False, False]
    for agent, action in enumerate(joint_action):
        if state.stuck[agent]:
            continue
        dest = grid.move(cells[agent], action)
        if dest is None:
            nulls[agent] = True
        else:
            cells[agent] = dest

    stuck = list(state.stuck)
    collided = state.collided
    if config.stick_on_collision:
        swapped = (config.swap_is_collision and state.cells[0] != state.cells[1]
                   and cells[0] == state.cells[1] and cells[1] == state.cells[0])
        if swapped:
            cells = list(state.cells)
        if cells[0] == cells[1] or swapped:
            stuck = [True, True]
            collided = True

    apples = list(state.apples)
    first_eaters: List[Optional[int]] = list(state.first_eaters) or [None] * len(state.orchard)
    rewarded = [False, False]
    if state.task == 'foraging':
        eaters: Dict[int, List[int]] = {}
        for agent, action in enumerate(joint_action):
            if action == 'eat' and state.apple_at(cells[agent]):
                eaters.setdefault(cells[agent], []).append(agent)
        coin = rng.integers(2)
        for cell, agents in sorted(eaters.items()):
            winner = agents[int(coin)] if len(agents) > 1 else agents[0]
            index = state.orchard.index(cell)
            apples[index] = False
            rewarded[winner] = True
            if first_eaters[index] is None:
                first_eaters[index] = winner
        draws = rng.random(len(state.orchard))
        for i, present in enumerate(state.apples):
            if not present and draws[i] < config.spawn_probability:
                apples[i] = True

    arrivals = list(state.arrival_steps)
    for agent, goal in enumerate(config.goals):
        if goal is not None and arrivals[agent] is None and cells[agent] == goal:
            arrivals[agent] = state.step + 1

    new_state = replace(
        state,
        step=state.step + 1,
        cells=(cells[0], cells[1]),
        stuck=(stuck[0], stuck[1]),
        apples=tuple(apples),
        rewards=(state.rewards[0] + rewarded[0], state.rewards[1] + rewarded[1]),
        rewarded_now=(rewarded[0], rewarded[1]),
        null_flags=(nulls[0], nulls[1]),
        arrival_steps=(arrivals[0], arrivals[1]),
        path_lengths=tuple(n + (c != old) for n, c, old in
                           zip(state.path_lengths, cells, state.cells)),  # type: ignore[arg-type]
        collided=collided,
        first_eaters=tuple(first_eaters),
    )
    return new_state, observe(new_state)


def trace_record(state: GridWorldState, joint_action: JointAction, seed: int) -> TraceRecord:
    return TraceRecord(
        seed=seed,
        step=state.step,
        actions=list(joint_action),
        cells=list(state.cells),
        stuck=list(state.stuck),
        null_flags=list(state.null_flags),
        rewarded=list(state.rewarded_now),
        apples={str(c): a for c, a in zip(state.orchard, state.apples)},
    )
