"""
Episode, batch and metrics tests for the Simulator.

The foraging comparisons run 100 seeds per condition and are marked slow.
"""
import csv
import json
import tempfile
import unittest
from pathlib import Path

import pytest

from tom_sim.config.config_manager import ConfigManager
from tom_sim.core.simulator import (
    OUTCOME_COLUMNS,
    Metrics,
    RunConfig,
    Simulator,
    outcome_row,
    run_batch,
    run_episode,
)
from tom_sim.environment.grid_world import OutcomeRecord, TaskConfig
from tom_sim.model.grid import FORAGING_ACTIONS
from tom_sim.planning.config import ToMPlannerConfig
from tom_sim.utils.errors import ConfigError


def outcome(seed=0, success=False, collision=False, steps=3, fed=(False, False),
            paths=(2, 2), winners=(None,)):
    return OutcomeRecord(task='foraging', seed=seed, done=True, success=success,
                         collision=collision, steps=steps, rewards=[int(f) for f in fed],
                         fed=list(fed), arrival_steps=[None, None], path_lengths=list(paths),
                         known_apple_winners=list(winners))


def foraging_run(red, purple, seeds=range(100)):
    return RunConfig(name=f'foraging_{red}', task=TaskConfig.foraging(), red=red,
                     purple=purple, planner=ToMPlannerConfig(horizon=3), seeds=list(seeds))


class TestRunConfig(unittest.TestCase):
    def test_defaults_are_valid(self):
        config = RunConfig()
        self.assertEqual(config.violations(), [])
        self.assertEqual(config.condition, 'si/si')

    def test_two_theory_of_mind_agents(self):
        with self.assertRaises(ConfigError):
            RunConfig(red='tom', purple='tom').validate()

    def test_bad_fields(self):
        problems = RunConfig(red='oracle', seeds=[], selection='best', workers=0).violations()
        self.assertEqual(len(problems), 4)

    def test_overrides(self):
        config = RunConfig().with_overrides(horizon=2, temperature=None, seeds=[4, 5],
                                            step_cap=6)
        self.assertEqual(config.planner.horizon, 2)
        self.assertEqual(config.planner.temperature, 1.0)
        self.assertEqual(config.seeds, [4, 5])
        self.assertEqual(config.effective_task().step_cap, 6)
        self.assertEqual(RunConfig().effective_task().step_cap, 12)

    def test_si_agents_get_a_plain_planner(self):
        config = RunConfig(planner=ToMPlannerConfig(horizon=2, other_lookahead='greedy'))
        plain = config.planner_for('si')
        self.assertFalse(hasattr(plain, 'other_lookahead'))
        self.assertEqual(plain.horizon, 2)
        self.assertIs(config.planner_for('tom'), config.planner)

    def test_json_round_trip(self):
        config = foraging_run('tom', 'si', seeds=[1, 2])
        self.assertEqual(RunConfig.from_json(config.to_json()), config)


class TestMetrics(unittest.TestCase):
    def test_aggregation(self):
        metrics = Metrics.from_outcomes([
            outcome(0, success=True, steps=2, fed=(True, True), paths=(1, 3), winners=(1,)),
            outcome(1, fed=(True, False), paths=(3, 1), winners=(0,)),
            outcome(2, collision=True, steps=1, paths=(2, 2)),
            outcome(3, success=True, steps=4, fed=(True, True), paths=(2, 2)),
        ])
        self.assertEqual(metrics.episodes, 4)
        self.assertEqual(metrics.successes, 2)
        self.assertAlmostEqual(metrics.success_rate, 0.5)
        self.assertAlmostEqual(metrics.collision_rate, 0.25)
        self.assertAlmostEqual(metrics.mean_steps, 3.0)
        self.assertEqual(metrics.rewards, [3, 2])
        self.assertAlmostEqual(metrics.both_fed_rate, 0.5)
        self.assertEqual(metrics.fed_fraction, [0.75, 0.5])
        self.assertEqual(metrics.mean_path_lengths, [2.0, 2.0])
        self.assertEqual(metrics.known_apple_wins, [1, 1])

    def test_no_success_has_no_mean_steps(self):
        metrics = Metrics.from_outcomes([outcome(collision=True)])
        self.assertIsNone(metrics.mean_steps)
        self.assertEqual(metrics.collision_rate, 1.0)

    def test_empty(self):
        empty = Metrics.from_outcomes([])
        self.assertEqual(empty.episodes, 0)
        self.assertEqual(empty.known_apple_wins, [0, 0])

    def test_outcome_row_columns(self):
        self.assertEqual(sorted(outcome_row(outcome())), sorted(OUTCOME_COLUMNS))


class TestCollisionEpisodes(unittest.TestCase):
    def test_two_sophisticated_agents_collide(self):
        result = run_episode(RunConfig(), 0)
        self.assertEqual(result.trace[0].cells, [5, 5])
        self.assertEqual(result.trace[0].actions, ['down_right', 'up_left'])
        self.assertTrue(result.outcome.collision)
        self.assertFalse(result.outcome.success)
        self.assertEqual(result.outcome.steps, 1)
        self.assertEqual(result.outcome.condition, 'si/si')

    def test_theory_of_mind_agent_gives_way(self):
        result = run_episode(RunConfig(name='collision_tom', red='tom'), 0)
        self.assertNotEqual(result.trace[0].cells[0], 5)
        for record in result.trace:
            self.assertNotEqual(record.cells[0], record.cells[1])
        self.assertTrue(result.outcome.success)
        self.assertFalse(result.outcome.collision)
        self.assertLessEqual(result.outcome.path_lengths[0], 4)
        self.assertEqual(result.outcome.path_lengths[1], 2)
        self.assertEqual(result.outcome.arrival_steps[1], 2)

    def test_posteriors_and_trees_are_recorded(self):
        result = run_episode(RunConfig(export_trees=True), 0)
        self.assertEqual(len(result.posteriors), 1)
        self.assertAlmostEqual(sum(result.posteriors[0]['red']), 1.0)
        self.assertEqual(set(result.trees[0]), {'red', 'purple'})
        tree = result.trees[0]['red']
        self.assertEqual(tree.action_names[tree.best_action()], 'down_right')


class TestBatches(unittest.TestCase):
    def test_deterministic(self):
        config = RunConfig(seeds=[0, 1, 2])
        first, second = run_batch(config), run_batch(config)
        self.assertEqual([o.to_json() for o in first.outcomes],
                         [o.to_json() for o in second.outcomes])

    def test_shared_cache_is_used_across_seeds(self):
        simulator = Simulator(RunConfig(seeds=[0, 1]))
        simulator.run_batch()
        self.assertGreater(simulator.cache.hits, 0)

    @pytest.mark.slow
    def test_worker_processes_keep_seed_order(self):
        result = run_batch(RunConfig(seeds=[3, 1, 2], workers=2))
        self.assertEqual([o.seed for o in result.outcomes], [3, 1, 2])
        self.assertEqual(result.outcomes, run_batch(RunConfig(seeds=[3, 1, 2])).outcomes)

    def test_write_batch(self):
        simulator = Simulator(RunConfig(seeds=[0, 1]))
        result = simulator.run_batch()
        with tempfile.TemporaryDirectory() as tmp:
            paths = simulator.write_batch(result, tmp)
            for path in paths.values():
                self.assertTrue(Path(path).exists())
            with open(paths['outcomes_csv'], newline='') as handle:
                rows = list(csv.DictReader(handle))
            self.assertEqual([r['seed'] for r in rows], ['0', '1'])
            self.assertEqual(rows[0]['collision'], 'True')
            metrics = json.loads(Path(paths['metrics']).read_text())
            self.assertEqual(metrics['episodes'], 2)
            self.assertEqual(len(Path(paths['outcomes']).read_text().splitlines()), 2)
            self.assertEqual(len(Path(paths['traces']).read_text().splitlines()), 2)
            self.assertEqual(RunConfig.from_json(Path(paths['config']).read_text()),
                             simulator.config)


@pytest.mark.slow
class TestForagingComparison(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.si = run_batch(foraging_run('si', 'si'))
        cls.tom = run_batch(foraging_run('tom', 'si'))

    def test_sophisticated_agents_race_for_the_known_apple(self):
        for o in self.si.outcomes:
            (winner,) = o.known_apple_winners
            self.assertIn(winner, (0, 1), o.seed)
        wins = self.si.metrics.known_apple_wins
        self.assertEqual(sum(wins), 100)
        red_share = wins[0] / sum(wins)
        self.assertTrue(0.35 <= red_share <= 0.65, red_share)

    def test_theory_of_mind_agent_heads_for_the_other_row_cell(self):
        left = FORAGING_ACTIONS.index('left')
        for episode in self.tom.episodes[:5]:
            self.assertEqual(episode.trace[0].actions[0], 'left')
            self.assertGreaterEqual(episode.posteriors[0]['red'][left], 0.85)

    def test_theory_of_mind_feeds_both_more_often(self):
        self.assertGreater(self.tom.metrics.both_fed_rate, self.si.metrics.both_fed_rate)


@pytest.mark.slow
class TestForagingCalibration(unittest.TestCase):
    def test_two_step_profile_explores_first(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = ConfigManager(tmp).load_run_config('foraging_calibration')
        result = run_episode(config, 0)
        left = FORAGING_ACTIONS.index('left')
        self.assertEqual(result.trace[0].actions[0], 'left')
        self.assertGreaterEqual(result.posteriors[0]['red'][left], 0.85)
        self.assertLessEqual(result.outcome.steps, 3)
        self.assertEqual(set(result.trees[0]), {'red', 'purple'})


if __name__ == '__main__':
    unittest.main()
