from unittest import TestCase

from lifeplan.data_types import exceptions


class TestExceptionHierarchy(TestCase):

    def test_domain_errors_are_value_errors(self):
        for error_type in (exceptions.DomainError, exceptions.SchemeValidationError,
                           exceptions.InconsistentOutcomeError,
                           exceptions.PriorElicitationError):
            self.assertTrue(issubclass(error_type, ValueError),
                            "%s should be usable as a ValueError" % error_type.__name__)
            self.assertTrue(issubclass(error_type, exceptions.LifePlanError))

    def test_numerical_errors_are_arithmetic_errors(self):
        for error_type in (exceptions.QuadratureError, exceptions.IntegrandError,
                           exceptions.DegenerateDesignError,
                           exceptions.FisherConsistencyError):
            self.assertTrue(issubclass(error_type, ArithmeticError))
            self.assertTrue(issubclass(error_type, exceptions.NumericalError))

    def test_config_error_is_not_a_domain_error(self):
        self.assertFalse(issubclass(exceptions.ConfigError, exceptions.DomainError))

    def test_scheme_validation_error_lists_violations(self):
        error = exceptions.SchemeValidationError(["l < r violated", "T1 < T2 violated"])
        self.assertEqual(("l < r violated", "T1 < T2 violated"), error.violations)
        self.assertIn("l < r violated", str(error))
        self.assertIn("T1 < T2 violated", str(error))

    def test_quadrature_error_carries_estimate(self):
        error = exceptions.QuadratureError("no convergence", 1.25, 0.5)
        self.assertEqual(1.25, error.estimate)
        self.assertEqual(0.5, error.error_bound)

    def test_integrand_error_carries_abscissa(self):
        error = exceptions.IntegrandError(0.75)
        self.assertEqual(0.75, error.abscissa)
        self.assertIn('0.75', str(error))
