"""
Episode and batch runner.

The Simulator builds the two agents of a run, loops observe -> update ->
plan -> act -> step until the task is done, and aggregates outcome records
over seeds. Every random draw is seeded from (seed, step), so a fixed run
configuration reproduces its trajectories bit for bit.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from dataclasses_json import dataclass_json

from ..agents.agent import PLANNER_KINDS, PlanCache, SIAgent, make_agent
from ..environment.grid_world import (
    AGENTS,
    JointAction,
    OutcomeRecord,
    TaskConfig,
    TraceRecord,
    is_done,
    observe,
    reset,
    step,
    trace_record,
)
from ..planning.config import PlannerConfig, ToMPlannerConfig
from ..planning.sophisticated import SELECTION_MODES
from ..planning.tree import PlanTree
from ..utils.errors import ConfigError, TomSimError
from ..utils.logger import TomSimLogger

OUTCOME_COLUMNS = [
    'seed', 'task', 'condition', 'success', 'collision', 'steps',
    'red_reward', 'purple_reward', 'red_fed', 'purple_fed',
    'red_arrival', 'purple_arrival', 'red_path', 'purple_path', 'known_apple_winners',
]


@dataclass_json
@dataclass
class RunConfig:
    """Configuration of one experimental condition."""

    name: str = 'collision_si'
    description: str = ''

    # Task and agents
    task: TaskConfig = field(default_factory=TaskConfig.collision)
    red: str = 'si'
    purple: str = 'si'
    planner: ToMPlannerConfig = field(default_factory=ToMPlannerConfig)

    # Execution
    seeds: List[int] = field(default_factory=lambda: [0])
    selection: str = 'argmax'
    step_cap: Optional[int] = None
    workers: int = 1

    # Export
    export_trees: bool = False

    @property
    def kinds(self) -> Tuple[str, str]:
        return self.red, self.purple

    @property
    def condition(self) -> str:
        return f"{self.red}/{self.purple}"

    def effective_task(self) -> TaskConfig:
        if self.step_cap is None:
            return self.task
        return replace(self.task, step_cap=self.step_cap)

    def planner_for(self, kind: str) -> PlannerConfig:
        if kind == 'tom':
            return self.planner
        return PlannerConfig(
            horizon=self.planner.horizon,
            policy_prune_threshold=self.planner.policy_prune_threshold,
            observation_prune_threshold=self.planner.observation_prune_threshold,
            temperature=self.planner.temperature,
        )

    def violations(self) -> List[str]:
        problems = list(self.effective_task().violations())
        problems += self.planner.violations()
        for agent, kind in zip(AGENTS, self.kinds):
            if kind not in PLANNER_KINDS:
                problems.append(f"{agent} planner {kind!r} must be one of {PLANNER_KINDS}")
        if sum(kind == 'tom' for kind in self.kinds) > 1:
            problems.append("at most one agent may plan with theory of mind")
        if not self.seeds:
            problems.append("at least one seed is required")
        if self.selection not in SELECTION_MODES:
            problems.append(f"selection={self.selection!r} must be one of {SELECTION_MODES}")
        if self.workers < 1:
            problems.append(f"workers={self.workers!r} must be >= 1")
        return problems

    def validate(self) -> "RunConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(f"RunConfig '{self.name}'", problems)
        return self

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with planner fields (horizon, thresholds, temperature) or run
        fields replaced; ``None`` values are ignored."""
        values = {k: v for k, v in overrides.items() if v is not None}
        planner_fields = set(ToMPlannerConfig.__dataclass_fields__)
        planner = replace(self.planner, **{k: v for k, v in values.items()
                                           if k in planner_fields})
        run = {k: v for k, v in values.items() if k not in planner_fields}
        return replace(self, planner=planner, **run)


@dataclass_json
@dataclass
class Metrics:
    """Aggregate of outcome records over seeds."""

    episodes: int
    success_rate: float
    collision_rate: float
    mean_steps: Optional[float]
    rewards: List[int]
    both_fed_rate: float
    fed_fraction: List[float]
    mean_path_lengths: List[float]
    successes: int = 0
    # per agent, known apples it ate first
    known_apple_wins: List[int] = field(default_factory=lambda: [0, 0])

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[OutcomeRecord]) -> "Metrics":
        completed = [o for o in outcomes if o.done]
        n = len(completed)
        if n == 0:
            return cls(0, 0.0, 0.0, None, [0, 0], 0.0, [0.0, 0.0], [0.0, 0.0])
        successes = sum(o.success for o in completed)
        successful_steps = [o.steps for o in completed if o.success]
        return cls(
            episodes=n,
            success_rate=successes / n,
            collision_rate=sum(o.collision for o in completed) / n,
            mean_steps=(sum(successful_steps) / len(successful_steps)
                        if successful_steps else None),
            rewards=[sum(o.rewards[a] for o in completed) for a in range(2)],
            both_fed_rate=sum(all(o.fed) for o in completed) / n,
            fed_fraction=[sum(o.fed[a] for o in completed) / n for a in range(2)],
            mean_path_lengths=[sum(o.path_lengths[a] for o in completed) / n for a in range(2)],
            successes=successes,
            known_apple_wins=[sum(w == a for o in completed for w in o.known_apple_winners)
                              for a in range(2)],
        )


@dataclass
class EpisodeResult:
    outcome: OutcomeRecord
    trace: List[TraceRecord]
    # per step: agent name -> tree (only with export_trees)
    trees: List[Dict[str, PlanTree]] = field(default_factory=list)
    posteriors: List[Dict[str, List[float]]] = field(default_factory=list)


@dataclass
class BatchResult:
    metrics: Metrics
    episodes: List[EpisodeResult]

    @property
    def outcomes(self) -> List[OutcomeRecord]:
        return [e.outcome for e in self.episodes]


def outcome_row(outcome: OutcomeRecord) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        'seed': outcome.seed, 'task': outcome.task, 'condition': outcome.condition,
        'success': outcome.success, 'collision': outcome.collision, 'steps': outcome.steps,
    }
    for a, agent in enumerate(AGENTS):
        row[f'{agent}_reward'] = outcome.rewards[a]
        row[f'{agent}_fed'] = outcome.fed[a]
        row[f'{agent}_arrival'] = outcome.arrival_steps[a]
        row[f'{agent}_path'] = outcome.path_lengths[a]
    row['known_apple_winners'] = ' '.join(
        AGENTS[w] if w is not None else '-' for w in outcome.known_apple_winners)
    return row


def _run_seed_chunk(config: RunConfig, seeds: List[int]) -> List[EpisodeResult]:
    simulator = Simulator(replace(config, workers=1))
    return [simulator.run_episode(seed) for seed in seeds]


class Simulator:
    """Runs episodes and batches of one RunConfig."""

    def __init__(self, config: RunConfig, cache: Optional[PlanCache] = None):
        self.logger = TomSimLogger('tom_sim.Simulator')
        try:
            self.config = config.validate()
            self.task = config.effective_task()
            self.cache = (cache if cache is not None
                          else PlanCache(keep_trees=self.config.export_trees))
        except TomSimError:
            raise
        except Exception as e:  # noqa: BLE001
            self.logger.error(f"Simulator initialization failed: {e}")
            raise TomSimError(f"Simulator initialization error: {e}") from e
        self.logger.debug(f"Simulator ready for '{config.name}' ({config.condition})")

    def make_agents(self) -> List[SIAgent]:
        return [make_agent(self.task, a, kind, self.config.planner_for(kind),
                           self.config.selection, self.cache)
                for a, kind in enumerate(self.config.kinds)]

    def run_episode(self, seed: int) -> EpisodeResult:
        """One episode: observe, update, plan, act, step until done."""
        agents = self.make_agents()
        state = reset(self.task, seed)
        observations = observe(state)
        for a, agent in enumerate(agents):
            agent.update(observations[a])

        trace: List[TraceRecord] = []
        trees: List[Dict[str, PlanTree]] = []
        posteriors: List[Dict[str, List[float]]] = []
        while not is_done(state, self.task, seed)[0]:
            actions = [agent.act(rng_seed=(seed, state.step, a + 1))
                       for a, agent in enumerate(agents)]
            posteriors.append({agent.name: agent.last_posterior.probs.tolist()  # type: ignore[union-attr]
                               for agent in agents})
            if self.config.export_trees:
                trees.append({agent.name: agent.last_tree  # type: ignore[misc]
                              for agent in agents})
            joint = JointAction(actions[0], actions[1])
            state, observations = step(state, joint, self.task, rng_seed=(seed, state.step))
            trace.append(trace_record(state, joint, seed))
            for a, agent in enumerate(agents):
                agent.update(observations[a])

        _, outcome = is_done(state, self.task, seed)
        outcome.condition = self.config.condition
        self.logger.info(f"{self.config.name} seed {seed}: success={outcome.success} "
                         f"collision={outcome.collision} steps={outcome.steps} "
                         f"rewards={outcome.rewards}")
        return EpisodeResult(outcome=outcome, trace=trace, trees=trees, posteriors=posteriors)

    def run_batch(self, seeds: Optional[Sequence[int]] = None) -> BatchResult:
        """Every seed of the run; results are ordered by seed whatever the worker count."""
        seeds = list(self.config.seeds if seeds is None else seeds)
        workers = min(self.config.workers, len(seeds))
        if workers <= 1:
            episodes = [self.run_episode(seed) for seed in seeds]
        else:
            chunks = [seeds[i::workers] for i in range(workers)]
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(_run_seed_chunk, [self.config] * workers, chunks))
            episodes = [episode for chunk in results for episode in chunk]
            episodes.sort(key=lambda e: seeds.index(e.outcome.seed))
        metrics = Metrics.from_outcomes([e.outcome for e in episodes])
        self.logger.info(f"{self.config.name}: {metrics.episodes} episodes, "
                         f"success {metrics.success_rate:.2f}, "
                         f"collision {metrics.collision_rate:.2f}, "
                         f"both fed {metrics.both_fed_rate:.2f}")
        return BatchResult(metrics=metrics, episodes=episodes)

    # -- output ---------------------------------------------------------------

    def write_outcomes(self, outcomes: Sequence[OutcomeRecord],
                       out_dir: Union[str, Path]) -> Path:
        path = Path(out_dir) / 'outcomes.csv'
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='') as handle:
            writer = csv.DictWriter(handle, fieldnames=OUTCOME_COLUMNS)
            writer.writeheader()
            for outcome in outcomes:
                writer.writerow(outcome_row(outcome))
        return path

    def write_batch(self, result: BatchResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
        """outcomes.csv, outcomes.jsonl, traces.jsonl and metrics.json under ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {'outcomes_csv': self.write_outcomes(result.outcomes, out)}
        paths['outcomes'] = out / 'outcomes.jsonl'
        paths['outcomes'].write_text(''.join(o.to_json() + '\n'  # type: ignore[attr-defined]
                                             for o in result.outcomes))
        paths['traces'] = out / 'traces.jsonl'
        paths['traces'].write_text(''.join(r.to_json() + '\n'  # type: ignore[attr-defined]
                                           for e in result.episodes for r in e.trace))
        paths['metrics'] = out / 'metrics.json'
        paths['metrics'].write_text(json.dumps(result.metrics.to_dict(), indent=2)  # type: ignore[attr-defined]
                                    + '\n')
        paths['config'] = out / 'run_config.json'
        paths['config'].write_text(self.config.to_json(indent=2) + '\n')  # type: ignore[attr-defined]
        return paths


def run_episode(config: RunConfig, seed: int) -> EpisodeResult:
    return Simulator(config).run_episode(seed)


def run_batch(config: RunConfig) -> BatchResult:
    return Simulator(config).run_batch()
