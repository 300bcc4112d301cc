import math
import unittest
from unittest import TestCase

import numpy as np

from lifeplan.data_types import exceptions
from lifeplan.design_layer import bayes_design
from lifeplan.design_layer import prior
from lifeplan.design_layer import search
from lifeplan.design_layer.search import SearchOptions
from lifeplan.model_layer.uhcs import SchemeParams
from test_lifeplan.test_design_layer.base import (SEED, SLOW_REASON, SLOW_TESTS, small_sample,
                                                  table_cost)

LINKED_SEARCH = SearchOptions(mode=search.LINKED)


class TestSearchOptions(TestCase):

    def test_labels(self):
        self.assertEqual('free', search.DEFAULT_SEARCH.label)
        self.assertEqual('linked:2', LINKED_SEARCH.label)
        self.assertEqual('linked:1.5', SearchOptions(mode=search.LINKED, kappa=1.5).label)

    def test_l_rule(self):
        self.assertEqual([1, 1, 2, 2, 3, 7], [search.DEFAULT_SEARCH.l_for(r)
                                              for r in (1, 2, 3, 4, 5, 13)])
        self.assertEqual(3, SearchOptions(fixed_l=3).l_for(13))

    def test_validation(self):
        for changes in ({'mode': 'both'}, {'kappa': 1.0}, {'tolerance': 0.0}, {'workers': 0},
                        {'fixed_l': 0}, {'max_iterations': 0}):
            with self.assertRaises(exceptions.DomainError, msg=str(changes)):
                SearchOptions(**changes)


class TestGrid(TestCase):

    def test_fixed_n(self):
        cells = search.grid_cells(small_sample(), table_cost(100), n=4)
        self.assertEqual([(4, 2, 1), (4, 3, 2), (4, 4, 2)], cells)

    def test_range_of_n(self):
        cells = search.grid_cells(small_sample(), table_cost(100), n_max=3)
        self.assertEqual([(2, 2, 1), (3, 2, 1), (3, 3, 2)], cells)

    def test_fixed_l(self):
        cells = search.grid_cells(small_sample(), table_cost(100), n=4,
                                  options=SearchOptions(fixed_l=2))
        self.assertEqual([(4, 3, 2), (4, 4, 2)], cells)

    def test_exactly_one_size(self):
        with self.assertRaises(exceptions.DomainError):
            search.grid_cells(small_sample(), table_cost(100))
        with self.assertRaises(exceptions.DomainError):
            search.grid_cells(small_sample(), table_cost(100), n=4, n_max=5)
        with self.assertRaises(exceptions.DomainError):
            search.grid_cells(small_sample(), table_cost(100), n=1)

    def test_fixed_l_beyond_every_cell(self):
        options = SearchOptions(fixed_l=10)
        with self.assertRaises(exceptions.DomainError):
            search.grid_cells(small_sample(), table_cost(100), n=5, options=options)
        with self.assertRaises(exceptions.DomainError):
            search.algorithm_one(small_sample(), table_cost(150), n=5, options=options)


class TestStartPoints(TestCase):

    def test_free(self):
        starts = search.start_points(small_sample(), search.DEFAULT_SEARCH)
        self.assertEqual(25, len(starts))
        for T1, T2 in starts:
            self.assertLess(0, T1)
            self.assertLess(T1, T2)

    def test_linked(self):
        starts = search.start_points(small_sample(), LINKED_SEARCH)
        self.assertEqual(5, len(starts))
        for T1, T2 in starts:
            self.assertEqual(2 * T1, T2)
        self.assertEqual(sorted(starts), starts)


class TestOptimizeTimes(TestCase):

    def test_respects_budget(self):
        sample = small_sample()
        cost = table_cost(80)
        solution = search.optimize_times(6, 4, 2, sample, cost)
        self.assertTrue(solution.feasible)
        self.assertLessEqual(solution.exp_cost, 80 * (1 + bayes_design.BUDGET_SLACK))
        self.assertEqual((6, 4, 2), (solution.scheme.n, solution.scheme.r, solution.scheme.l))
        self.assertLess(solution.scheme.T1, solution.scheme.T2)
        self.assertEqual('free', solution.mode)
        check = bayes_design.evaluate(solution.scheme, sample, cost)
        self.assertAlmostEqual(check.objective, solution.objective, places=12)

    def test_beats_feasible_starts(self):
        sample = small_sample()
        cost = table_cost(80)
        solution = search.optimize_times(6, 4, 2, sample, cost)
        for T1, T2 in search.start_points(sample, search.DEFAULT_SEARCH):
            start = bayes_design.evaluate(solution.scheme.replace(T1=T1, T2=T2), sample, cost)
            if start.feasible:
                self.assertGreater(solution.objective, start.objective - 1e-3)

    def test_linked_times(self):
        sample = small_sample()
        solution = search.optimize_times(6, 4, 2, sample, table_cost(80), LINKED_SEARCH)
        self.assertAlmostEqual(2.0, solution.scheme.T2 / solution.scheme.T1, places=12)
        self.assertEqual('linked:2', solution.mode)

    def test_generous_budget_prefers_long_tests(self):
        sample = small_sample()
        tight = search.optimize_times(6, 4, 2, sample, table_cost(60))
        loose = search.optimize_times(6, 4, 2, sample, table_cost(1e5))
        self.assertTrue(loose.feasible)
        self.assertGreaterEqual(loose.objective, tight.objective - 1e-6)

    def test_infeasible(self):
        solution = search.optimize_times(6, 4, 2, small_sample(), table_cost(5))
        self.assertFalse(solution.feasible)
        self.assertGreater(solution.exp_cost, 5)

    def test_ties_go_to_the_cheaper_plan(self):
        scheme = SchemeParams(6, 4, 2, 1.0, 2.0)

        def plan(objective, exp_cost):
            return bayes_design.DesignSolution(scheme, objective, 0.01, 3.0, 1.0, exp_cost, True)

        tolerance = search.DEFAULT_SEARCH.tolerance
        incumbent = plan(2.0, 70.0)
        self.assertTrue(search.improves(plan(2.0 - tolerance / 2, 60.0), incumbent, tolerance))
        self.assertFalse(search.improves(plan(2.0 + tolerance / 2, 75.0), incumbent, tolerance))
        self.assertTrue(search.improves(plan(2.0 + 2 * tolerance, 75.0), incumbent, tolerance))
        self.assertFalse(search.improves(plan(2.0 - 2 * tolerance, 10.0), incumbent, tolerance))


class TestAlgorithmOne(TestCase):

    def test_skips_unaffordable_cells(self):
        with self.assertLogs('lifeplan.design_layer.search', 'INFO') as logs:
            solution = search.solve_cell(6, 4, 2, small_sample(), table_cost(5))
        self.assertFalse(solution.feasible)
        self.assertEqual(-math.inf, solution.objective)
        self.assertTrue(any('skipped' in line for line in logs.output))

    def test_best_over_cells(self):
        sample = small_sample()
        cost = table_cost(60)
        solutions = list(search.iter_cell_solutions(sample, cost, n=5))
        self.assertEqual([(5, r, math.ceil(r / 2)) for r in range(2, 6)],
                         [(s.scheme.n, s.scheme.r, s.scheme.l) for s in solutions])
        best = search.algorithm_one(sample, cost, n=5)
        self.assertTrue(best.feasible)
        feasible = [s for s in solutions if s.feasible]
        self.assertEqual(max(s.objective for s in feasible), best.objective)
        self.assertEqual(best.scheme.l, math.ceil(best.scheme.r / 2))

    def test_no_feasible_plan(self):
        best = search.algorithm_one(small_sample(), table_cost(2), n_max=4)
        self.assertFalse(best.feasible)

    def test_worker_count_does_not_change_result(self):
        sample = small_sample(30, SEED + 1)
        cost = table_cost(50)
        serial = list(search.iter_cell_solutions(sample, cost, n=4))
        parallel = list(search.iter_cell_solutions(sample, cost, n=4,
                                                   options=SearchOptions(workers=2)))
        self.assertEqual([repr(s.as_row()) for s in serial], [repr(s.as_row()) for s in parallel])

    def test_optimum_grows_with_budget(self):
        sample = small_sample()
        objectives = []
        for budget in (40, 60, 100):
            solution = search.algorithm_one(sample, table_cost(budget), n=4)
            self.assertTrue(solution.feasible, budget)
            objectives.append(solution.objective)
        for tighter, looser in zip(objectives, objectives[1:]):
            self.assertGreaterEqual(looser, tighter - 1e-3, objectives)


@unittest.skipUnless(SLOW_TESTS, SLOW_REASON)
class TestReferenceDesigns(TestCase):
    """Optimal plans for n = 20 under the first preset prior with c_f = 10 and c_t = 15."""

    @classmethod
    def setUpClass(cls):
        cls.sample = prior.sample_prior(prior.PRIOR_1, 1000, SEED)

    def check_plan(self, budget, r, T1, objective):
        solution = search.algorithm_one(self.sample, table_cost(budget), n=20)
        self.assertTrue(solution.feasible)
        self.assertLessEqual(abs(solution.scheme.r - r), 1, str(solution.scheme))
        self.assertEqual(math.ceil(solution.scheme.r / 2), solution.scheme.l)
        self.assertLess(abs(solution.scheme.T1 - T1), 0.15 * T1, str(solution.scheme))
        self.assertLess(abs(solution.objective - objective), 0.1, str(solution.objective))
        return solution

    def test_budgets(self):
        objectives = [self.check_plan(150, 13, 0.7044, 4.4623).objective,
                      self.check_plan(180, 15, 1.1133, 4.7102).objective,
                      self.check_plan(200, 17, 1.3148, 4.8408).objective]
        self.assertEqual(sorted(objectives), objectives)

    def test_huge_budget_approaches_complete_sample(self):
        solution = search.algorithm_one(self.sample, table_cost(1e6), n=20)
        # Every unit is observed once T1 is far enough out.
        complete = math.log(20 ** 2 / 2) - float(np.mean(np.log(self.sample.tau)))
        self.assertLess(complete - solution.objective, 0.1)
        self.assertLessEqual(solution.objective, complete + 1e-6)

    def test_tighter_prior_is_more_informative(self):
        sample = prior.sample_prior(prior.PRIOR_2, 1000, SEED)
        loose = search.algorithm_one(self.sample, table_cost(250), n=20)
        tight = search.algorithm_one(sample, table_cost(250), n=20)
        self.assertGreater(tight.objective, loose.objective)

    def test_free_size(self):
        solution = search.algorithm_one(self.sample, table_cost(300), n_max=20)
        self.assertTrue(solution.feasible)
        self.assertGreaterEqual(solution.objective, 4.8997 - 0.15, str(solution.scheme))

    def test_free_size_under_tighter_prior(self):
        sample = prior.sample_prior(prior.PRIOR_2, 1000, SEED)
        solution = search.algorithm_one(sample, table_cost(250), n_max=20)
        self.assertTrue(solution.feasible)
        self.assertGreaterEqual(solution.objective, 5.1840 - 0.15, str(solution.scheme))
        self.assertLessEqual(solution.exp_cost, 250 * (1 + bayes_design.BUDGET_SLACK))
