"""
Expected number of failures E[D] and expected test duration E[xi] under Type-II UHCS.

Both expectations are assembled from two hybrid-censoring building blocks, defined for a rank k
and a time T:

    N(k, T) = sum_{i=1..k} F_{i:n}(T)                 expected failures of Type-I HCS (k, T)
    C(k, T) = int_0^T (1 - F_{k:n}(x)) dx = E[X_{k:n} ^ T]

and

    E[D]  = l + n F(T1) + N(r, T2) - N(l, T2) - N(r, T1)
    E[xi] = E[X_{l:n}] + T1 + C(r, T2) - C(l, T2) - C(r, T1)

The scalar functions evaluate these at one parameter point with adaptive quadrature.
ExpectationTable evaluates them for a whole array of parameter draws at once.
"""
import dataclasses
import logging
import math

import numpy as np
from scipy import special

from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import ArrayLike, FloatArray
from lifeplan.model_layer import lifetime_model
from lifeplan.model_layer import uhcs
from lifeplan.model_layer.lifetime_model import LogNormalParams, OrderStatIndex
from lifeplan.numerics import quadrature

_logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class HybridBlockN:
    """N(rank, T): the expected number of failures among the first rank order statistics by T."""
    rank: int
    T: float
    value: float


@dataclasses.dataclass(frozen=True)
class HybridBlockC:
    """C(rank, T): the expected duration of a test stopped at min(X_{rank:n}, T)."""
    rank: int
    T: float
    value: float


def _check_block_arguments(rank: int, T: float, n: int) -> None:
    OrderStatIndex(rank, n)
    if not T > 0:
        raise exceptions.DomainError("T must be positive; got %r." % (T,))


def block_N(rank: int, T: float, n: int, params: LogNormalParams) -> HybridBlockN:
    """sum_{i=1..rank} F_{i:n}(T)."""
    _check_block_arguments(rank, T, n)
    if math.isinf(T):
        return HybridBlockN(rank, T, float(rank))
    z = params.standardize(T)
    return HybridBlockN(rank, T, float(lifetime_model.expected_count_z(z, rank, n)))


def block_C(rank: int, T: float, n: int, params: LogNormalParams,
            spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> HybridBlockC:
    """int_0^T (1 - F_{rank:n}(x)) dx.

    In z the integrand is sigma exp(mu + sigma z) S(z), with S the survival function of the
    standard normal order statistic. Below z = -Z_MAX, S equals one to within 1e-16, so that
    stretch contributes exactly its length in x."""
    _check_block_arguments(rank, T, n)
    sigma = params.sigma
    x_floor = math.exp(params.mu - sigma * quadrature.Z_MAX)
    if T <= x_floor:
        return HybridBlockC(rank, T, T)
    upper = quadrature.Z_MAX + sigma
    if not math.isinf(T):
        upper = min(upper, float(params.standardize(T)))

    def integrand(z: float) -> float:
        return sigma * math.exp(params.mu + sigma * z) * float(
            lifetime_model.order_stat_sf_z(z, rank, n))

    value = x_floor
    if upper > -quadrature.Z_MAX:
        value += quadrature.integrate(integrand, -quadrature.Z_MAX, upper, spec)
    return HybridBlockC(rank, T, value)


def expected_failures(scheme: uhcs.SchemeParams, params: LogNormalParams) -> float:
    """E[D] = l + n F(T1) + N(r, T2) - N(l, T2) - N(r, T1)."""
    uhcs.validate(scheme)
    n, r, l = scheme.n, scheme.r, scheme.l
    return (l + n * lifetime_model.cdf(scheme.T1, params)
            + block_N(r, scheme.T2, n, params).value
            - block_N(l, scheme.T2, n, params).value
            - block_N(r, scheme.T1, n, params).value)


def expected_duration(scheme: uhcs.SchemeParams, params: LogNormalParams,
                      spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> float:
    """E[xi] = E[X_{l:n}] + T1 + C(r, T2) - C(l, T2) - C(r, T1)."""
    uhcs.validate(scheme)
    n, r, l = scheme.n, scheme.r, scheme.l
    return (lifetime_model.order_stat_mean(OrderStatIndex(l, n), params, spec) + scheme.T1
            + block_C(r, scheme.T2, n, params, spec).value
            - block_C(l, scheme.T2, n, params, spec).value
            - block_C(r, scheme.T1, n, params, spec).value)


class ExpectationTable:
    """The building blocks N and C for many parameter draws (mu_k, tau_k) at once.

    For each rank in use, the integrand of C is tabulated on a fixed panel grid for every draw and
    accumulated, so that C(rank, T) for a new T costs one table lookup plus one short
    Gauss-Legendre rule per draw. Tables are built on first use of a rank and kept."""

    def __init__(self, mu: ArrayLike, tau: ArrayLike, n: int, panel_width: float = 1 / 8,
                 panel_order: int = 8):
        self.mu = np.asarray(mu, dtype=float)
        self.tau = np.asarray(tau, dtype=float)
        if self.mu.shape != self.tau.shape or self.mu.ndim != 1:
            raise exceptions.DomainError("mu and tau must be one-dimensional and of equal length.")
        if np.any(~(self.tau > 0)):
            raise exceptions.DomainError("Every tau must be positive.")
        if n < 1:
            raise exceptions.DomainError("Sample size must be at least 1; got %r." % (n,))
        self.n = n
        self.sigma = 1 / np.sqrt(self.tau)
        self.root_tau = np.sqrt(self.tau)
        upper = quadrature.Z_MAX + float(np.max(self.sigma))
        self.grid = quadrature.PanelGrid(-quadrature.Z_MAX, upper, panel_width, panel_order)
        self.x_floor = np.exp(self.mu - self.sigma * quadrature.Z_MAX)
        # ln of the Jacobian-weighted tilt sigma exp(mu + sigma z) at every node, per draw.
        self._log_tilt = (np.log(self.sigma) + self.mu)[:, None, None] \
            + self.sigma[:, None, None] * self.grid.nodes[None, :, :]
        self._tables = {}
        self._means = {}

    def __len__(self) -> int:
        return len(self.mu)

    def standardize(self, T: ArrayLike) -> FloatArray:
        """z-values of threshold(s) T for every draw."""
        with np.errstate(divide='ignore'):
            return self.root_tau * (np.log(T) - self.mu)

    def _log_survival(self, z: FloatArray, rank: int) -> FloatArray:
        with np.errstate(divide='ignore'):
            return np.log(lifetime_model.order_stat_sf_z(z, rank, self.n))

    def _table(self, rank: int) -> FloatArray:
        table = self._tables.get(rank)
        if table is None:
            OrderStatIndex(rank, self.n)
            log_survival = self._log_survival(self.grid.nodes, rank)
            table = self.grid.cumulative(np.exp(self._log_tilt + log_survival[None, :, :]))
            self._tables[rank] = table
            _logger.debug("Tabulated truncated means for rank %d of %d over %d draws.",
                          rank, self.n, len(self))
        return table

    def block_N(self, rank: int, T: float) -> FloatArray:
        """N(rank, T) for every draw."""
        _check_block_arguments(rank, T, self.n)
        if math.isinf(T):
            return np.full(len(self), float(rank))
        return lifetime_model.expected_count_z(self.standardize(T), rank, self.n)

    def block_C(self, rank: int, T: float) -> FloatArray:
        """C(rank, T) for every draw."""
        _check_block_arguments(rank, T, self.n)
        table = self._table(rank)
        z = self.grid.clip(self.standardize(T))
        index, nodes, weights = self.grid.partial_rule(z)
        base = quadrature.take_edges(table, index)
        log_tilt = (np.log(self.sigma) + self.mu)[:, None] + self.sigma[:, None] * nodes
        partial = np.sum(weights * np.exp(log_tilt + self._log_survival(nodes, rank)), axis=1)
        value = self.x_floor + base + partial
        return np.where(T <= self.x_floor, T, value)

    def order_stat_mean(self, rank: int) -> FloatArray:
        """E[X_{rank:n}] for every draw."""
        mean = self._means.get(rank)
        if mean is None:
            OrderStatIndex(rank, self.n)
            mean = self.x_floor + self._table(rank)[:, -1]
            self._means[rank] = mean
        return mean

    def expected_failures(self, scheme: uhcs.SchemeParams) -> FloatArray:
        """E[D] for every draw."""
        self._check_scheme(scheme)
        n, r, l = scheme.n, scheme.r, scheme.l
        return (l + n * special.ndtr(self.standardize(scheme.T1))
                + self.block_N(r, scheme.T2) - self.block_N(l, scheme.T2)
                - self.block_N(r, scheme.T1))

    def expected_duration(self, scheme: uhcs.SchemeParams) -> FloatArray:
        """E[xi] for every draw."""
        self._check_scheme(scheme)
        r, l = scheme.r, scheme.l
        return (self.order_stat_mean(l) + scheme.T1
                + self.block_C(r, scheme.T2) - self.block_C(l, scheme.T2)
                - self.block_C(r, scheme.T1))

    def _check_scheme(self, scheme: uhcs.SchemeParams) -> None:
        uhcs.validate(scheme)
        if scheme.n != self.n:
            raise exceptions.DomainError("Table is for n=%d; scheme has n=%d."
                                         % (self.n, scheme.n))
