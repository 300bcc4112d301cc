import math
from unittest import TestCase

import numpy as np

from lifeplan.data_types import exceptions
from lifeplan.design_layer import prior
from lifeplan.design_layer.prior import NormalGammaPrior, PriorSample
from lifeplan.model_layer import lifetime_model
from lifeplan.model_layer.lifetime_model import LogNormalParams


class TestElicitation(TestCase):

    def test_first_preset(self):
        hyper = prior.PRIOR_1
        self.assertAlmostEqual(2.25, hyper.a1, delta=1e-12)
        self.assertAlmostEqual(1.5, hyper.b1, delta=1e-12)
        self.assertAlmostEqual(-0.5, hyper.p2, delta=1e-12)
        self.assertAlmostEqual(2.4, hyper.q2, delta=1e-12)
        self.assertEqual('a1=2.250000 b1=1.500000 p2=-0.500000 q2=2.400000', str(hyper))

    def test_second_preset(self):
        hyper = prior.PRIOR_2
        self.assertAlmostEqual(5.0, hyper.a1, delta=1e-12)
        self.assertAlmostEqual(10.0, hyper.b1, delta=1e-12)
        self.assertAlmostEqual(0.01, hyper.p2, delta=1e-12)
        self.assertAlmostEqual(50.0, hyper.q2, delta=1e-9)
        self.assertEqual('a1=5.000000 b1=10.000000 p2=0.010000 q2=50.000000', str(hyper))

    def test_presets(self):
        self.assertEqual({'prior1', 'prior2'}, set(prior.PRESETS))
        self.assertIs(prior.PRIOR_1, prior.PRESETS['prior1'])

    def test_moments_invert_elicitation(self):
        for moments in (prior.PRIOR_1_MOMENTS, prior.PRIOR_2_MOMENTS,
                        prior.PriorMoments(3.0, 0.1, 20.0, 4.0)):
            recovered = prior.elicit(*moments).moments()
            np.testing.assert_allclose(moments, recovered, rtol=1e-12, atol=1e-14)

    def test_mean_params(self):
        self.assertEqual(LogNormalParams(-0.5, 1.5), prior.PRIOR_1.mean_params)

    def test_undefined_variance(self):
        with self.assertRaisesRegex(exceptions.PriorElicitationError,
                                    'Prior variance of mu undefined'):
            prior.elicit(0.0, 1.0, 1.0, 1.0)
        with self.assertRaises(exceptions.PriorElicitationError):
            prior.elicit(0.0, 1.0, 1.0, 2.0)

    def test_nonpositive_inputs(self):
        for arguments in ((0.0, 0.0, 1.0, 0.1), (0.0, 1.0, -1.0, 0.1), (0.0, 1.0, 1.0, 0.0)):
            with self.assertRaises(exceptions.PriorElicitationError):
                prior.elicit(*arguments)

    def test_hyperparameter_validation(self):
        for arguments in ((1.0, 1.0, 0.0, 1.0), (2.0, 0.0, 0.0, 1.0), (2.0, 1.0, math.nan, 1.0),
                          (2.0, 1.0, 0.0, -1.0)):
            with self.assertRaises(exceptions.PriorElicitationError):
                NormalGammaPrior(*arguments)


class TestPredictive(TestCase):

    def test_quantile_inverts_cdf(self):
        for hyper in (prior.PRIOR_1, prior.PRIOR_2):
            for p in (0.01, 0.3, 0.5, 0.9):
                self.assertAlmostEqual(p, hyper.predictive_cdf(hyper.predictive_quantile(p)),
                                       places=10)

    def test_median(self):
        self.assertAlmostEqual(math.exp(-0.5), prior.PRIOR_1.predictive_quantile(0.5), places=12)

    def test_sample_agrees_with_closed_form(self):
        sample = prior.sample_prior(prior.PRIOR_1, 100_000, 17)
        for p in (0.1, 0.4, 0.7):
            expected = prior.PRIOR_1.predictive_quantile(p)
            self.assertLess(abs(sample.predictive_quantile(p) - expected), 0.02 * expected)
            self.assertAlmostEqual(p, sample.predictive_cdf(expected), delta=0.005)

    def test_invalid_levels(self):
        with self.assertRaises(exceptions.DomainError):
            prior.PRIOR_1.predictive_quantile(1.0)
        with self.assertRaises(exceptions.DomainError):
            prior.PRIOR_1.predictive_cdf(0.0)


class TestPriorSample(TestCase):

    def test_moments(self):
        sample = prior.sample_prior(prior.PRIOR_1, 200_000, 3)
        se_tau = math.sqrt(1.0 / len(sample))
        self.assertAlmostEqual(1.5, float(np.mean(sample.tau)), delta=4 * se_tau)
        self.assertAlmostEqual(1.0, float(np.var(sample.tau)), delta=0.05)
        self.assertAlmostEqual(-0.5, float(np.mean(sample.mu)),
                               delta=4 * math.sqrt(0.5 / len(sample)))
        self.assertAlmostEqual(0.5, float(np.var(sample.mu)), delta=0.05)

    def test_deterministic_in_seed(self):
        first = prior.sample_prior(prior.PRIOR_2, 500, 11)
        second = prior.sample_prior(prior.PRIOR_2, 500, 11)
        np.testing.assert_array_equal(first.mu, second.mu)
        np.testing.assert_array_equal(first.tau, second.tau)
        third = prior.sample_prior(prior.PRIOR_2, 500, 12)
        self.assertFalse(np.array_equal(first.mu, third.mu))
        self.assertEqual(11, first.seed)
        self.assertEqual(500, first.n_draws)

    def test_read_only(self):
        sample = prior.sample_prior(prior.PRIOR_1, 10, 1)
        with self.assertRaises(ValueError):
            sample.mu[0] = 0.0

    def test_identity_hash(self):
        first = prior.sample_prior(prior.PRIOR_1, 10, 1)
        second = prior.sample_prior(prior.PRIOR_1, 10, 1)
        self.assertNotEqual(first, second)
        self.assertEqual(2, len({first, second}))

    def test_single_draw(self):
        params = LogNormalParams(0.3, 2.0)
        sample = PriorSample.single(params)
        self.assertEqual([params], sample.draws)
        self.assertAlmostEqual(lifetime_model.quantile(0.25, params), sample.predictive_quantile(0.25),
                               places=12)

    def test_validation(self):
        with self.assertRaises(exceptions.DomainError):
            prior.sample_prior(prior.PRIOR_1, 0, 1)
        with self.assertRaises(exceptions.DomainError):
            PriorSample(np.zeros(2), np.array([1.0, 0.0]), 0)
        with self.assertRaises(exceptions.DomainError):
            PriorSample(np.zeros(2), np.ones(3), 0)
