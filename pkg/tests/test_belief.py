"""
Tests for categorical beliefs, Bayes updates, messages and KL divergence.
"""
import math
import unittest

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from tom_sim.inference.belief import (
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
from tom_sim.utils.errors import (
    NegativeEntryError,
    NonFiniteError,
    NormalizationError,
    SupportMismatchError,
    TomSimError,
    ZeroMassError,
)

_weights = st.floats(min_value=0.0, max_value=100.0, allow_nan=False, allow_infinity=False)


@st.composite
def distributions(draw, size=None):
    n = size if size is not None else draw(st.integers(min_value=1, max_value=6))
    values = draw(st.lists(_weights, min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-6))
    return normalize(values)


@st.composite
def distribution_pairs(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    return draw(distributions(n)), draw(distributions(n))


class TestNormalize(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_allclose(normalize([2, 2]).probs, [0.5, 0.5])
        np.testing.assert_allclose(normalize([1, 3]).probs, [0.25, 0.75])

    def test_zero_mass(self):
        with self.assertRaises(ZeroMassError):
            normalize([0.0, 0.0])

    def test_negative_entry(self):
        with self.assertRaises(NegativeEntryError):
            normalize([-1.0, 2.0])

    def test_categorical_rejects_bad_vectors(self):
        with self.assertRaises(NonFiniteError):
            Categorical(np.array([np.nan, 1.0]))
        with self.assertRaises(NormalizationError):
            Categorical(np.array([0.5, 0.6]))
        with self.assertRaises(TomSimError) as caught:
            Categorical(np.array([0.2, 0.2]))
        self.assertAlmostEqual(caught.exception.context['total'], 0.4)
        with self.assertRaises(SupportMismatchError):
            Categorical(np.array([]))

    def test_categorical_is_read_only(self):
        c = Categorical.uniform(3)
        with self.assertRaises(ValueError):
            c.probs[0] = 1.0

    @settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(distributions())
    def test_unit_mass(self, dist):
        self.assertAlmostEqual(float(dist.probs.sum()), 1.0, delta=1e-9)
        self.assertTrue(np.all(dist.probs >= 0))


class TestSoftmaxNeg(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_allclose(softmax_neg([0.0, 0.0]).probs, [0.5, 0.5])
        np.testing.assert_allclose(softmax_neg([0.0, math.log(3)]).probs, [0.75, 0.25])

    def test_positive_infinity_gets_no_mass(self):
        np.testing.assert_array_equal(softmax_neg([np.inf, 0.0]).probs, [0.0, 1.0])

    def test_rejects_nan_and_bad_temperature(self):
        with self.assertRaises(NonFiniteError):
            softmax_neg([np.nan, 0.0])
        with self.assertRaises(ValueError):
            softmax_neg([0.0, 1.0], temperature=0.0)

    @settings(max_examples=10_000, deadline=None)
    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=8), st.integers(-50, 50))
    def test_shift_invariance(self, values, shift):
        base = softmax_neg([float(v) for v in values])
        shifted = softmax_neg([float(v + shift) for v in values])
        self.assertEqual(base.argmax(), shifted.argmax())
        np.testing.assert_allclose(base.probs, shifted.probs, atol=1e-12)


class TestKLDivergence(unittest.TestCase):
    def test_examples(self):
        p = Categorical(np.array([0.3, 0.7]))
        self.assertEqual(kl_divergence(p, p), 0.0)
        half = Categorical.uniform(2)
        self.assertAlmostEqual(kl_divergence(Categorical.delta(2, 0), half), math.log(2))
        q = Categorical(np.array([0.75, 0.25]))
        expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        self.assertAlmostEqual(kl_divergence(q, half), expected, places=12)

    def test_mass_outside_support_is_infinite(self):
        self.assertEqual(kl_divergence(Categorical.uniform(2), Categorical.delta(2, 0)),
                         float('inf'))

    def test_support_mismatch(self):
        with self.assertRaises(SupportMismatchError):
            kl_divergence(Categorical.uniform(2), Categorical.uniform(3))

    @settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(distribution_pairs())
    def test_non_negative(self, pair):
        q, p = pair
        self.assertGreaterEqual(kl_divergence(q, p), 0.0)
        self.assertEqual(kl_divergence(q, q), 0.0)


class TestBayesUpdate(unittest.TestCase):
    def test_hand_computed_posterior(self):
        prior = FactoredBelief((Categorical.uniform(2),))
        posterior = bayes_update(prior, [LikelihoodSlice((0,), np.array([0.9, 0.1]))])
        np.testing.assert_allclose(posterior[0].probs, [0.9, 0.1])

    def test_untouched_factors_are_kept(self):
        other = Categorical(np.array([0.2, 0.8]))
        prior = FactoredBelief((Categorical.uniform(2), other))
        posterior = bayes_update(prior, [LikelihoodSlice((0,), np.array([1.0, 0.0]))])
        self.assertIs(posterior[1], other)

    def test_two_parent_evidence_uses_co_parent_prior(self):
        prior = FactoredBelief((Categorical.uniform(2), Categorical(np.array([0.25, 0.75]))))
        # outcome seen only when both factors are in state 1
        table = np.array([[0.0, 0.0], [0.0, 1.0]])
        posterior = bayes_update(prior, [LikelihoodSlice((0, 1), table)])
        np.testing.assert_allclose(posterior[0].probs, [0.0, 1.0])
        np.testing.assert_allclose(posterior[1].probs, [0.0, 1.0])

    def test_impossible_observation(self):
        prior = FactoredBelief((Categorical.delta(2, 0),))
        with self.assertRaises(ZeroMassError):
            bayes_update(prior, [LikelihoodSlice((0,), np.array([0.0, 1.0]))])


class TestMessages(unittest.TestCase):
    def test_elementwise_product(self):
        belief = FactoredBelief((Categorical.uniform(3),))
        result = apply_message(belief, LikelihoodMessage((np.array([3.0, 1.0, 1.0]),)))
        np.testing.assert_allclose(result[0].probs, [0.6, 0.2, 0.2])

    def test_ones_message_is_identity(self):
        belief = FactoredBelief((Categorical(np.array([0.1, 0.9])), Categorical.delta(3, 2)))
        msg = LikelihoodMessage.ones(belief.cardinalities)
        self.assertTrue(msg.is_identity())
        result = apply_message(belief, msg)
        self.assertEqual(result.key(), belief.key())

    def test_message_is_floored(self):
        msg = LikelihoodMessage((np.array([0.0, 2.0]),))
        self.assertEqual(msg.weights[0][0], EPSILON)

    def test_delta_survives_any_message_that_keeps_it(self):
        belief = FactoredBelief((Categorical.delta(3, 0),))
        result = apply_message(belief, LikelihoodMessage((np.array([0.5, 1e6, 1.0]),)))
        np.testing.assert_allclose(result[0].probs, [1.0, 0.0, 0.0], atol=1e-9)

    def test_smoothing_lets_a_message_revive_a_ruled_out_state(self):
        belief = FactoredBelief((Categorical.delta(2, 0),))
        msg = LikelihoodMessage((np.array([EPSILON, 1e15]),))
        self.assertEqual(apply_message(belief, msg)[0].argmax(), 0)
        self.assertGreater(apply_message(smooth(belief), msg)[0][1], 0.9)

    def test_smooth_lifts_zeros(self):
        smoothed = smooth(FactoredBelief((Categorical.delta(3, 1),)))
        self.assertTrue(np.all(smoothed[0].probs > 0))
        self.assertEqual(smoothed[0].argmax(), 1)


class TestExpectedObservation(unittest.TestCase):
    def test_matrix_vector(self):
        belief = FactoredBelief((Categorical(np.array([0.25, 0.75])),))
        # P(o | s=0) = [1, 0], P(o | s=1) = [0.2, 0.8]
        likelihood = np.array([[1.0, 0.2], [0.0, 0.8]])
        np.testing.assert_allclose(expected_observation(belief, likelihood, (0,)).probs,
                                   [0.4, 0.6])

    def test_delta_beliefs_pick_the_slice(self):
        rng = np.random.default_rng(3)
        likelihood = rng.dirichlet(np.ones(4), size=(2, 3)).transpose(2, 0, 1)
        belief = FactoredBelief((Categorical.delta(2, 1), Categorical.delta(3, 2)))
        result = expected_observation(belief, likelihood, (0, 1))
        np.testing.assert_array_equal(result.probs, likelihood[:, 1, 2])

    def test_shape_mismatch(self):
        belief = FactoredBelief((Categorical.uniform(3),))
        with self.assertRaises(SupportMismatchError):
            expected_observation(belief, np.eye(2), (0,))


if __name__ == '__main__':
    unittest.main()
