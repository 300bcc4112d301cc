"""
The log-normal lifetime distribution LN(mu, tau), parameterized by the location mu and the
precision tau of ln X.

Most quantities are naturally functions of the standardized log-time z = sqrt(tau) (ln x - mu).
The *_z functions work in that variable, are vectorized, and carry no parameter dependence at
all; the public x-space operations validate their arguments and map onto them.
"""
import dataclasses
import math

import numpy as np
from scipy import special

from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import ArrayLike, FloatArray
from lifeplan.numerics import special as nspecial
from lifeplan.numerics import quadrature


@dataclasses.dataclass(frozen=True)
class LogNormalParams:
    """Lifetime model parameters theta = (mu, tau)."""
    mu: float
    tau: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise exceptions.DomainError("mu must be finite; got %r." % (self.mu,))
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise exceptions.DomainError("tau must be positive and finite; got %r." % (self.tau,))

    @property
    def sigma(self) -> float:
        """The standard deviation of ln X."""
        return 1 / math.sqrt(self.tau)

    def standardize(self, x: ArrayLike):
        """Map lifetimes onto z = sqrt(tau) (ln x - mu)."""
        return math.sqrt(self.tau) * (np.log(x) - self.mu)

    def destandardize(self, z: ArrayLike):
        """Map standardized log-times back onto lifetimes."""
        return np.exp(self.mu + self.sigma * np.asarray(z, dtype=float))


@dataclasses.dataclass(frozen=True)
class OrderStatIndex:
    """The index of X_{i:n}, the i-th smallest of n lifetimes."""
    i: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise exceptions.DomainError("Sample size must be at least 1; got %r." % (self.n,))
        if not 1 <= self.i <= self.n:
            raise exceptions.DomainError("Rank must lie in 1..%d; got %r." % (self.n, self.i))


def _check_times(x: ArrayLike) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise exceptions.DomainError("Lifetimes must be strictly positive.")
    return x


def _unwrap(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


# --- Standardized (theta-free) kernels -----------------------------------------------------------

def hazard_score_z(z: ArrayLike) -> FloatArray:
    """The theta-free factors (a(z), b(z)) of the gradient of the log-hazard:

        d ln h / d mu  = sqrt(tau) * a(z),   a(z) = z - lambda(z)
        d ln h / d tau = b(z) / (2 tau),     b(z) = 1 - z^2 + z lambda(z)

    Returned with a trailing axis of length 2."""
    z = np.asarray(z, dtype=float)
    hazard = np.asarray(nspecial.std_normal_hazard(z))
    return np.stack([z - hazard, 1 - z * z + z * hazard], axis=-1)


def log_order_stat_pdf_z(z: ArrayLike, i: int, n: int) -> FloatArray:
    """ln of the density of the i-th of n standard normal order statistics. Evaluated in log-space,
    so the Phi^(i-1) (1-Phi)^(n-i) factor cannot underflow before it is combined."""
    z = np.asarray(z, dtype=float)
    log_coefficient = special.gammaln(n + 1) - special.gammaln(i) - special.gammaln(n - i + 1)
    result = log_coefficient + nspecial.log_std_normal_pdf(z)
    if i > 1:
        result = result + (i - 1) * special.log_ndtr(z)
    if n > i:
        result = result + (n - i) * special.log_ndtr(-z)
    return result


def _beta_tail(a: int, b: int, z: FloatArray) -> FloatArray:
    return np.asarray(nspecial.reg_incomplete_beta(nspecial.std_normal_cdf(z), a, b))


def order_stat_cdf_z(z: ArrayLike, i: int, n: int) -> FloatArray:
    """P(Z_{i:n} <= z) for standard normal order statistics."""
    z = np.asarray(z, dtype=float)
    lower = _beta_tail(i, n - i + 1, np.minimum(z, 0))
    upper = 1 - _beta_tail(n - i + 1, i, -np.maximum(z, 0))
    return np.where(z <= 0, lower, upper)


def order_stat_sf_z(z: ArrayLike, i: int, n: int) -> FloatArray:
    """P(Z_{i:n} > z), computed without cancellation in either tail."""
    z = np.asarray(z, dtype=float)
    lower = 1 - _beta_tail(i, n - i + 1, np.minimum(z, 0))
    upper = _beta_tail(n - i + 1, i, -np.maximum(z, 0))
    return np.where(z <= 0, lower, upper)


def order_stat_weight_z(z: ArrayLike, rank: int, n: int) -> FloatArray:
    """The summed density of the first rank standard normal order statistics,

        sum_{i=1..rank} g_{i:n}(z) = n phi(z) P(Bin(n - 1, Phi(z)) <= rank - 1).

    For rank = n this is n phi(z)."""
    z = np.asarray(z, dtype=float)
    density = n * np.asarray(nspecial.std_normal_pdf(z))
    if rank >= n:
        return density
    return density * nspecial.binomial_cdf(rank - 1, n - 1, nspecial.std_normal_cdf(-z))


def expected_count_z(z: ArrayLike, rank: int, n: int) -> FloatArray:
    """sum_{i=1..rank} P(Z_{i:n} <= z), the expected number of the first rank order statistics
    falling at or below z."""
    z = np.asarray(z, dtype=float)
    total = np.zeros(z.shape)
    for i in range(1, rank + 1):
        total += order_stat_cdf_z(z, i, n)
    return total


# --- Lifetime-space operations -------------------------------------------------------------------

def pdf(x: ArrayLike, params: LogNormalParams):
    """sqrt(tau / 2 pi) x^-1 exp(-tau (ln x - mu)^2 / 2)."""
    x = _check_times(x)
    z = params.standardize(x)
    return _unwrap(np.exp(nspecial.log_std_normal_pdf(z) + 0.5 * math.log(params.tau)) / x)


def cdf(x: ArrayLike, params: LogNormalParams):
    """Phi(sqrt(tau) (ln x - mu))."""
    x = _check_times(x)
    return nspecial.std_normal_cdf(params.standardize(x))


def quantile(p: ArrayLike, params: LogNormalParams):
    """The inverse of cdf."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise exceptions.DomainError("Quantile levels must lie strictly between 0 and 1.")
    return _unwrap(params.destandardize(special.ndtri(p)))


def log_hazard(x: ArrayLike, params: LogNormalParams):
    """ln h(x) = ln f(x) - ln(1 - F(x))."""
    x = _check_times(x)
    z = params.standardize(x)
    return _unwrap(nspecial.log_std_normal_pdf(z) + 0.5 * math.log(params.tau) - np.log(x)
                   - special.log_ndtr(-z))


def log_hazard_grad(x: ArrayLike, params: LogNormalParams) -> FloatArray:
    """The gradient (d ln h / d mu, d ln h / d tau) of the log-hazard, in closed form. The result
    has shape x.shape + (2,)."""
    x = _check_times(x)
    factors = hazard_score_z(params.standardize(x))
    scale = np.array([math.sqrt(params.tau), 1 / (2 * params.tau)])
    return factors * scale


def order_stat_cdf(x: ArrayLike, idx: OrderStatIndex, params: LogNormalParams):
    """F_{i:n}(x) = I_{F(x)}(i, n - i + 1)."""
    x = _check_times(x)
    return _unwrap(order_stat_cdf_z(params.standardize(x), idx.i, idx.n))


def order_stat_pdf(x: ArrayLike, idx: OrderStatIndex, params: LogNormalParams):
    """n! / ((i-1)! (n-i)!) F^(i-1) (1-F)^(n-i) f, with a single exponentiation at the end."""
    x = _check_times(x)
    z = params.standardize(x)
    log_density = log_order_stat_pdf_z(z, idx.i, idx.n) + 0.5 * math.log(params.tau) - np.log(x)
    return _unwrap(np.exp(log_density))


def order_stat_mean(idx: OrderStatIndex, params: LogNormalParams,
                    spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> float:
    """E[X_{i:n}], integrated in z. The upper limit is shifted by sigma because the factor
    x = exp(mu + sigma z) tilts the integrand's mass upward by that much."""
    sigma = params.sigma

    def integrand(z: float) -> float:
        return math.exp(params.mu + sigma * z + float(log_order_stat_pdf_z(z, idx.i, idx.n)))

    return quadrature.integrate(integrand, -quadrature.Z_MAX, quadrature.Z_MAX + sigma, spec)
