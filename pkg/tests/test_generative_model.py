"""
Tests for grid geometry, model builders, validation and YAML round-trips.
"""
import dataclasses
import os
import tempfile
import unittest

import numpy as np

from model_factories import random_micro_model
from tom_sim.inference.belief import Categorical
from tom_sim.model.builders import (
    APPLE,
    EMPTY,
    NULL_STATE,
    REWARD,
    WASTELAND_OUTCOME,
    Correspondence,
    build_collision_model,
    build_foraging_model,
    model_of_other,
)
from tom_sim.model.generative_model import (
    ModalitySpec,
    ensure_valid,
    joint_outcomes,
    validate,
)
from tom_sim.model.grid import COLLISION_ACTIONS, FORAGING_ACTIONS, Grid
from tom_sim.model.serialization import dump_model, load_model, models_equal
from tom_sim.utils.errors import BadCellError, ModelValidationError


class TestGrid(unittest.TestCase):
    def setUp(self):
        self.grid = Grid()

    def test_moves(self):
        self.assertEqual(self.grid.move(1, 'down_right'), 5)
        self.assertIsNone(self.grid.move(1, 'up'))
        self.assertEqual(self.grid.move(5, 'noop'), 5)

    def test_reachable_sets(self):
        self.assertEqual(self.grid.reachable(1, COLLISION_ACTIONS), [1, 2, 4, 5])
        self.assertEqual(self.grid.reachable(2, COLLISION_ACTIONS), [1, 2, 3, 4, 5, 6])
        self.assertEqual(len(self.grid.reachable(5, COLLISION_ACTIONS)), 9)

    def test_orchard(self):
        self.assertEqual(self.grid.orchard_cells(), [1, 2, 3, 7, 8, 9])
        self.assertFalse(self.grid.is_orchard(5))

    def test_bad_cell(self):
        for cell in (0, 10, True, 2.5):
            with self.assertRaises(BadCellError):
                self.grid.check_cell(cell)


class TestCollisionModel(unittest.TestCase):
    def setUp(self):
        self.model = build_collision_model('focal', 9, start_cell=1, other_cell=9)

    def test_valid_for_every_goal(self):
        for goal in range(1, 10):
            self.assertEqual(validate(build_collision_model('focal', goal)), [])

    def test_shape(self):
        self.assertEqual([f.state_count for f in self.model.factors], [10, 10])
        self.assertEqual(self.model.actions, COLLISION_ACTIONS)
        self.assertEqual(self.model.horizon, 3)

    def test_other_walk_from_corner(self):
        column = self.model.factors[1].transition[:, 1, 0]
        np.testing.assert_allclose(column[[1, 2, 4, 5]], [0.25] * 4)
        self.assertAlmostEqual(float(column.sum()), 1.0)

    def test_leaving_the_grid_enters_null(self):
        up = self.model.action_index('up')
        self.assertEqual(self.model.factors[0].transition[NULL_STATE, 1, 9, up], 1.0)

    def test_noop_stays(self):
        noop = self.model.action_index('noop')
        self.assertEqual(self.model.factors[0].transition[5, 5, 9, noop], 1.0)

    def test_own_moves_are_deterministic(self):
        own = self.model.factors[0].transition
        self.assertTrue(np.all(np.sort(own, axis=0)[-1] == 1.0))

    def test_co_located_agent_stays(self):
        right = self.model.action_index('right')
        self.assertEqual(self.model.factors[0].transition[5, 5, 5, right], 1.0)

    def test_preferences(self):
        c = self.model.preferences.log_preferences[0]
        self.assertEqual(c[9], 10.0)
        self.assertEqual(c[NULL_STATE], -100.0)

    def test_goal_utility(self):
        model = build_collision_model('focal', 9, null_preference=0.0)
        expected = -(10.0 - np.log(np.exp(10.0) + 9.0))
        self.assertAlmostEqual(model.utility(0, 9), expected, places=12)

    def test_bad_cells(self):
        with self.assertRaises(BadCellError):
            build_collision_model('focal', 10)
        with self.assertRaises(ValueError):
            build_collision_model('bystander', 1)


class TestForagingModel(unittest.TestCase):
    def setUp(self):
        self.model = build_foraging_model('focal', 8, other_cell=6)
        self.item_7 = self.model.factor_index('item_7')

    def test_valid_for_every_start(self):
        for start in range(1, 10):
            self.assertEqual(validate(build_foraging_model('focal', start)), [])

    def test_shape(self):
        self.assertEqual(len(self.model.factors), 9)
        self.assertEqual(self.model.actions, FORAGING_ACTIONS)
        self.assertEqual([m.outcome_count for m in self.model.modalities], [9, 9, 3, 2])
        self.assertEqual(self.model.self_factors, (0, 2))

    def test_known_apple_prior(self):
        item_9 = self.model.factor_index('item_9')
        self.assertEqual(self.model.priors[item_9], Categorical.delta(2, APPLE))
        np.testing.assert_allclose(self.model.priors[self.item_7].probs, [0.5, 0.5])

    def test_empty_cell_spawns(self):
        belief = self.model.prior_belief().replace(self.item_7, Categorical.delta(2, EMPTY))
        predicted = self.model.predict(belief, self.model.action_index('noop'))
        np.testing.assert_allclose(predicted[self.item_7].probs, [0.25, 0.75])

    def test_eating_consumes_and_rewards(self):
        model = build_foraging_model('focal', 7)
        belief = model.prior_belief().replace(self.item_7, Categorical.delta(2, APPLE))
        predicted = model.predict(belief, model.action_index('eat'))
        self.assertEqual(predicted[self.item_7], Categorical.delta(2, EMPTY))
        self.assertEqual(predicted[model.factor_index('own_reward')].argmax(), REWARD)
        self.assertEqual(predicted[0], Categorical.delta(9, 6))

    def test_apples_only_vanish_when_eaten(self):
        eat = self.model.action_index('eat')
        table = self.model.factors[self.item_7].transition
        for own in range(9):
            for action in range(self.model.action_count):
                if own == 6 and action == eat:
                    continue
                self.assertEqual(table[APPLE, APPLE, own, action], 1.0)

    def test_middle_row_is_wasteland(self):
        model = build_foraging_model('focal', 5)
        item = model.expected_outcomes(model.prior_belief())[model.modality_index('item')]
        self.assertAlmostEqual(item[WASTELAND_OUTCOME], 1.0, places=12)

    def test_other_walk_follows_the_given_repertoire(self):
        still = build_foraging_model('focal', 8, other_actions=('noop', 'eat'))
        np.testing.assert_array_equal(still.factors[1].transition[:, :, 0], np.eye(9))
        sideways = build_foraging_model('focal', 8, actions=('left', 'right', 'noop', 'eat'))
        column = sideways.factors[1].transition[:, 4, 0]
        np.testing.assert_allclose(column[[3, 4, 5]], [1 / 3] * 3)
        self.assertAlmostEqual(float(column.sum()), 1.0)

    def test_known_apple_must_be_on_the_orchard(self):
        with self.assertRaises(BadCellError):
            build_foraging_model('focal', 8, known_apples=(5,))


class TestModelOfOther(unittest.TestCase):
    def test_collision_goal(self):
        other = model_of_other('collision', 1, start_cell=9, other_cell=1)
        self.assertEqual(other.preferences.log_preferences[0][1], 10.0)
        self.assertEqual(other.priors[0], Categorical.delta(10, 9))

    def test_foraging_preferences_match(self):
        other = model_of_other('foraging', start_cell=6, other_cell=8)
        np.testing.assert_array_equal(other.preferences.log_preferences[3], [0.0, 10.0])

    def test_correspondence_swaps_locations(self):
        focal = build_foraging_model('focal', 8, other_cell=6)
        other = model_of_other('foraging', start_cell=6, other_cell=8)
        corr = Correspondence.between(focal, other)
        self.assertEqual(corr.other_of(focal.factor_index('other_location')),
                         other.factor_index('own_location'))
        self.assertEqual(corr.focal_of(other.factor_index('other_location')),
                         focal.factor_index('own_location'))
        self.assertIsNone(corr.other_of(focal.factor_index('own_reward')))
        self.assertEqual(corr.other_of(focal.factor_index('item_9')), other.factor_index('item_9'))
        self.assertEqual(corr.violations(focal, other), [])

    def test_requires_goal_or_start(self):
        with self.assertRaises(ValueError):
            model_of_other('collision')
        with self.assertRaises(ValueError):
            model_of_other('foraging')
        with self.assertRaises(ValueError):
            model_of_other('chess', 1)


class TestValidation(unittest.TestCase):
    def setUp(self):
        self.model = random_micro_model(np.random.default_rng(7))

    def test_well_formed(self):
        self.assertEqual(validate(self.model), [])
        self.assertIs(ensure_valid(self.model), self.model)

    def test_column_not_summing_to_one(self):
        spec = self.model.modalities[0]
        likelihood = np.array(spec.likelihood)
        likelihood[:, 0] *= 0.9
        bad = dataclasses.replace(self.model, modalities=(
            ModalitySpec(spec.name, spec.outcome_count, spec.parent_factors, likelihood),
        ) + self.model.modalities[1:])
        violations = validate(bad)
        self.assertTrue(any(spec.name in v and 'column' in v for v in violations))
        with self.assertRaises(ModelValidationError):
            ensure_valid(bad)

    def test_parent_out_of_range(self):
        spec = self.model.modalities[0]
        bad = dataclasses.replace(self.model, modalities=(
            ModalitySpec(spec.name, spec.outcome_count, (5,), spec.likelihood),
        ) + self.model.modalities[1:])
        self.assertTrue(any('parent index out of range' in v for v in validate(bad)))

    def test_horizon_below_one(self):
        bad = dataclasses.replace(self.model, horizon=0)
        self.assertTrue(any('horizon' in v for v in validate(bad)))


class TestJointOutcomes(unittest.TestCase):
    def test_product_order_and_zeros(self):
        outcomes = joint_outcomes([Categorical(np.array([0.5, 0.5])),
                                   Categorical(np.array([0.0, 0.25, 0.75]))])
        self.assertEqual([o for o, _ in outcomes], [(0, 1), (0, 2), (1, 1), (1, 2)])
        self.assertAlmostEqual(sum(p for _, p in outcomes), 1.0)


class TestSerialization(unittest.TestCase):
    def test_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            for model in (build_collision_model('focal', 9, start_cell=1, other_cell=9),
                          build_foraging_model('focal', 8, other_cell=6)):
                path = dump_model(model, os.path.join(tmp, f'{model.name}.yaml'))
                self.assertTrue(models_equal(model, load_model(path)))

    def test_different_models_differ(self):
        self.assertFalse(models_equal(build_collision_model('focal', 9),
                                      build_collision_model('focal', 1)))


if __name__ == '__main__':
    unittest.main()
