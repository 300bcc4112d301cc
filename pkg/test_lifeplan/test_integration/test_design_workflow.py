import math
import unittest

from lifeplan.design_layer import bayes_design
from lifeplan.design_layer import prior
from lifeplan.design_layer import search
from lifeplan.design_layer.bayes_design import CostModel
from lifeplan.model_layer import expectations
from lifeplan.model_layer import uhcs


class TestDesignWorkflow(unittest.TestCase):

    def test_elicit_optimize_simulate(self):
        """Elicit a prior from its moments, find the best plan with n = 6 for a modest budget,
        then run the chosen plan many times at the prior mean and verify that the observed
        failures and durations agree with the expectations the design was based on."""

        # Prior beliefs about (mu, tau) expressed as means and variances.
        hyper = prior.elicit(-0.5, 0.5, 1.5, 1.0)
        self.assertEqual(prior.PRIOR_1, hyper)

        sample = prior.sample_prior(hyper, 80, 2024)
        cost = CostModel(10.0, 15.0, 70.0)
        best = search.algorithm_one(sample, cost, n=6)
        self.assertTrue(best.feasible)
        self.assertEqual(math.ceil(best.scheme.r / 2), best.scheme.l)

        # Re-evaluating the chosen plan reproduces the reported criteria.
        again = bayes_design.evaluate(best.scheme, sample, cost)
        self.assertEqual(best.objective, again.objective)
        self.assertEqual(best.exp_cost, again.exp_cost)

        # The plan behaves as expected when run at the prior mean.
        theta = hyper.mean_params
        summary = uhcs.summarize(best.scheme, theta, 20_000, 99)
        expected_d = expectations.expected_failures(best.scheme, theta)
        expected_xi = expectations.expected_duration(best.scheme, theta)
        self.assertLess(abs(summary.mean_d - expected_d), 4 * summary.se_d)
        self.assertLess(abs(summary.mean_xi - expected_xi), 4 * summary.se_xi)
        self.assertEqual(20_000, sum(summary.case_counts.values()))

    def test_linked_and_free_searches(self):
        """Tying T2 to 2 T1 restricts the search, so it can never beat the free search by more
        than the optimizer's tolerance."""
        sample = prior.sample_prior(prior.PRIOR_2, 60, 7)
        cost = CostModel(10.0, 15.0, 60.0)
        free = search.optimize_times(5, 4, 2, sample, cost)
        linked = search.optimize_times(5, 4, 2, sample, cost,
                                       search.SearchOptions(mode=search.LINKED))
        self.assertTrue(free.feasible)
        self.assertLessEqual(linked.objective, free.objective + 1e-3)
