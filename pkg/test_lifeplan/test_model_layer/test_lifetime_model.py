import itertools
import math
from unittest import TestCase

import numpy as np
from scipy import special

from lifeplan.data_types import exceptions
from lifeplan.model_layer import lifetime_model
from lifeplan.model_layer.lifetime_model import LogNormalParams, OrderStatIndex
from lifeplan.numerics import quadrature
from test_lifeplan.test_model_layer.base import PRIOR_MEAN_THETA, central_difference


class TestLogNormalParams(TestCase):

    def test_validation(self):
        with self.assertRaises(exceptions.DomainError):
            LogNormalParams(0.0, 0.0)
        with self.assertRaises(exceptions.DomainError):
            LogNormalParams(math.nan, 1.0)
        with self.assertRaises(exceptions.DomainError):
            LogNormalParams(0.0, math.inf)

    def test_standardize_round_trip(self):
        params = LogNormalParams(0.3, 2.0)
        self.assertAlmostEqual(1.7, float(params.destandardize(params.standardize(1.7))),
                               places=13)
        self.assertAlmostEqual(1 / math.sqrt(2.0), params.sigma, places=15)

    def test_order_stat_index(self):
        OrderStatIndex(1, 1)
        with self.assertRaises(exceptions.DomainError):
            OrderStatIndex(0, 5)
        with self.assertRaises(exceptions.DomainError):
            OrderStatIndex(6, 5)


class TestDistribution(TestCase):

    def test_median(self):
        params = LogNormalParams(0.4, 3.0)
        self.assertAlmostEqual(0.5, lifetime_model.cdf(math.exp(0.4), params), places=15)
        self.assertAlmostEqual(math.exp(0.4), lifetime_model.quantile(0.5, params), places=14)

    def test_quantile_inverts_cdf(self):
        params = PRIOR_MEAN_THETA
        for p in (1e-10, 0.05, 0.5, 0.95, 1 - 1e-10):
            x = lifetime_model.quantile(p, params)
            self.assertAlmostEqual(p, lifetime_model.cdf(x, params), delta=1e-12)

    def test_pdf_integrates_to_one(self):
        params = PRIOR_MEAN_THETA
        lower = lifetime_model.quantile(1e-15, params)
        upper = lifetime_model.quantile(1 - 1e-15, params)
        total = quadrature.integrate(lambda x: lifetime_model.pdf(x, params), lower, upper)
        self.assertAlmostEqual(1.0, total, delta=1e-8)

    def test_domain(self):
        with self.assertRaises(exceptions.DomainError):
            lifetime_model.pdf(0.0, PRIOR_MEAN_THETA)
        with self.assertRaises(exceptions.DomainError):
            lifetime_model.cdf(-1.0, PRIOR_MEAN_THETA)
        with self.assertRaises(exceptions.DomainError):
            lifetime_model.quantile(1.0, PRIOR_MEAN_THETA)

    def test_log_hazard(self):
        params = PRIOR_MEAN_THETA
        x = 1.3
        expected = math.log(lifetime_model.pdf(x, params) / (1 - lifetime_model.cdf(x, params)))
        self.assertAlmostEqual(expected, lifetime_model.log_hazard(x, params), places=12)

    def test_log_hazard_grad_matches_finite_differences(self):
        grid = itertools.product((0.1, 0.5, 1.0, 2.0, 5.0), (-1.0, -0.5, 0.0, 0.5, 1.0),
                                 (0.5, 1.0, 1.5, 2.0, 4.0))
        for x, mu, tau in grid:
            params = LogNormalParams(mu, tau)
            expected = central_difference(lambda p: lifetime_model.log_hazard(x, p), params)
            actual = lifetime_model.log_hazard_grad(x, params)
            np.testing.assert_allclose(actual, expected, rtol=1e-5, atol=1e-5,
                                       err_msg="x=%r mu=%r tau=%r" % (x, mu, tau))

    def test_log_hazard_grad_shape(self):
        grad = lifetime_model.log_hazard_grad(np.array([0.5, 1.0, 2.0]), PRIOR_MEAN_THETA)
        self.assertEqual((3, 2), grad.shape)


class TestOrderStatistics(TestCase):

    def test_single_unit(self):
        params = PRIOR_MEAN_THETA
        index = OrderStatIndex(1, 1)
        for x in (0.2, 0.6, 1.5):
            self.assertAlmostEqual(lifetime_model.cdf(x, params),
                                   lifetime_model.order_stat_cdf(x, index, params), places=14)
            self.assertAlmostEqual(lifetime_model.pdf(x, params),
                                   lifetime_model.order_stat_pdf(x, index, params), places=13)

    def test_minimum_and_maximum(self):
        params = PRIOR_MEAN_THETA
        x, n = 0.8, 6
        F = lifetime_model.cdf(x, params)
        self.assertAlmostEqual(1 - (1 - F) ** n,
                               lifetime_model.order_stat_cdf(x, OrderStatIndex(1, n), params),
                               places=13)
        self.assertAlmostEqual(F ** n,
                               lifetime_model.order_stat_cdf(x, OrderStatIndex(n, n), params),
                               places=13)

    def test_cdf_and_sf_are_complementary(self):
        z = np.linspace(-9, 9, 73)
        for i in (1, 4, 10):
            np.testing.assert_allclose(lifetime_model.order_stat_cdf_z(z, i, 10)
                                       + lifetime_model.order_stat_sf_z(z, i, 10), 1.0,
                                       atol=1e-14)

    def test_counts_sum_to_n_times_cdf(self):
        z = np.linspace(-4, 4, 17)
        n = 9
        expected = n * special.ndtr(z)
        np.testing.assert_allclose(lifetime_model.expected_count_z(z, n, n), expected,
                                   rtol=1e-12, atol=1e-14)

    def test_density_sum(self):
        n = 7
        for z in (-1.5, 0.0, 0.8, 2.5):
            self.assertAlmostEqual(n * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi),
                                   float(lifetime_model.order_stat_weight_z(z, n, n)), places=12)
            partial = sum(math.exp(float(lifetime_model.log_order_stat_pdf_z(z, i, n)))
                          for i in range(1, 4))
            self.assertAlmostEqual(partial, float(lifetime_model.order_stat_weight_z(z, 3, n)),
                                   places=12)

    def test_order_stat_pdf_integrates_to_one(self):
        params = PRIOR_MEAN_THETA
        index = OrderStatIndex(3, 8)
        lower = lifetime_model.quantile(1e-14, params)
        upper = lifetime_model.quantile(1 - 1e-14, params)
        total = quadrature.integrate(lambda x: lifetime_model.order_stat_pdf(x, index, params),
                                     lower, upper)
        self.assertAlmostEqual(1.0, total, delta=1e-8)

    def test_mean_of_single_unit(self):
        params = PRIOR_MEAN_THETA
        expected = math.exp(params.mu + 0.5 / params.tau)
        actual = lifetime_model.order_stat_mean(OrderStatIndex(1, 1), params)
        self.assertLess(abs(actual - expected) / expected, 1e-8)

    def test_means_sum_to_n_times_mean(self):
        params = LogNormalParams(0.2, 2.0)
        n = 5
        total = sum(lifetime_model.order_stat_mean(OrderStatIndex(i, n), params)
                    for i in range(1, n + 1))
        expected = n * math.exp(params.mu + 0.5 / params.tau)
        self.assertLess(abs(total - expected) / expected, 1e-7)
