"""
Exception hierarchy.

All exceptions defined in the package have their home here.
"""
import typing


class LifePlanError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(LifePlanError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class SchemeValidationError(DomainError):
    """The censoring scheme violates one or more of its invariants. Each violated invariant is
    reported individually in the violations attribute."""

    def __init__(self, violations: typing.Sequence[str]):
        self.violations = tuple(violations)
        super().__init__("Invalid censoring scheme: " + "; ".join(self.violations))


class InconsistentOutcomeError(DomainError):
    """The observed outcome of an experiment cannot have been produced by the scheme."""


class PriorElicitationError(DomainError):
    """The requested prior moments cannot be matched by a normal-gamma prior."""


class ConfigError(LifePlanError):
    """The run configuration is malformed or incomplete."""


class NumericalError(LifePlanError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance. The best available estimate
    and its error bound are attached."""

    def __init__(self, message: str, estimate, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class IntegrandError(NumericalError):
    """The integrand produced a non-finite value."""

    def __init__(self, abscissa: float):
        super().__init__("Integrand is not finite at x=%r." % (abscissa,))
        self.abscissa = abscissa


class DegenerateDesignError(NumericalError):
    """The Fisher information of the design is singular, so its log-determinant is undefined."""


class FisherConsistencyError(NumericalError):
    """The assembled Fisher information has a negative eigenvalue beyond numerical slack. This
    signals a misconfigured quadrature rather than a property of the design."""
