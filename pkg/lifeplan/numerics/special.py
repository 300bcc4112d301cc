"""
Standard-normal special functions and the regularized incomplete beta function.

Every function accepts a scalar or an array. Scalars come back as plain floats, arrays as
arrays of the broadcast shape.
"""
import math
import typing

import numpy as np
from scipy import special

from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import ArrayLike, FloatArray

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)

# Above this point 1 - Phi(z) is evaluated through the continued fraction of the Mills ratio
# instead of as a difference.
HAZARD_BRANCH_POINT = 6.0

# Depth of the continued fraction. At z > 6 the tail beyond this depth is far below 1e-16.
_HAZARD_CF_DEPTH = 60

Real = typing.Union[float, FloatArray]


def _unwrap(value: np.ndarray) -> Real:
    if np.ndim(value) == 0:
        return float(value)
    return value


def std_normal_pdf(z: ArrayLike) -> Real:
    """The standard normal density phi(z)."""
    z = np.asarray(z, dtype=float)
    return _unwrap(np.exp(-0.5 * z * z - LOG_SQRT_2PI))


def log_std_normal_pdf(z: ArrayLike) -> Real:
    """The natural log of phi(z)."""
    z = np.asarray(z, dtype=float)
    return _unwrap(-0.5 * z * z - LOG_SQRT_2PI)


def std_normal_cdf(z: ArrayLike) -> Real:
    """The standard normal distribution function Phi(z). Monotone, saturating at 0 and 1."""
    return _unwrap(special.ndtr(np.asarray(z, dtype=float)))


def log_std_normal_cdf(z: ArrayLike) -> Real:
    """ln Phi(z), accurate deep into the lower tail."""
    return _unwrap(special.log_ndtr(np.asarray(z, dtype=float)))


def log_std_normal_sf(z: ArrayLike) -> Real:
    """ln(1 - Phi(z)), accurate deep into the upper tail."""
    return _unwrap(special.log_ndtr(-np.asarray(z, dtype=float)))


def std_normal_quantile(p: ArrayLike) -> Real:
    """The inverse of Phi."""
    return _unwrap(special.ndtri(np.asarray(p, dtype=float)))


def std_normal_hazard(z: ArrayLike) -> Real:
    """The standard normal hazard phi(z) / (1 - Phi(z)), also known as the inverse Mills ratio.

    Below the branch point the ratio is evaluated directly, since 1 - Phi(z) = Phi(-z) carries
    full relative precision there. Above it the continued fraction

        lambda(z) = z + 1/(z + 2/(z + 3/(z + ...)))

    is evaluated from the tail up. The result is strictly increasing and bounded below by
    max(0, z)."""
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = z.reshape(-1)
    result = np.empty(z.shape)
    direct = z <= HAZARD_BRANCH_POINT
    if np.any(direct):
        zd = z[direct]
        result[direct] = np.exp(-0.5 * zd * zd - LOG_SQRT_2PI) / special.ndtr(-zd)
    tail = ~direct
    if np.any(tail):
        zt = z[tail]
        value = zt.copy()
        for depth in range(_HAZARD_CF_DEPTH, 0, -1):
            value = zt + depth / value
        result[tail] = value
    return _unwrap(result.reshape(shape))


def reg_incomplete_beta(p: ArrayLike, a: ArrayLike, b: ArrayLike) -> Real:
    """The regularized incomplete beta function I_p(a, b), with I_0 = 0 and I_1 = 1."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0) or np.any(p > 1):
        raise exceptions.DomainError("p must lie in [0, 1].")
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise exceptions.DomainError("a and b must be positive.")
    return _unwrap(special.betainc(a, b, p))


def binomial_cdf(k: ArrayLike, trials: int, q: ArrayLike) -> Real:
    """P(Bin(trials, p) <= k) where q = 1 - p is given rather than p. Passing the complement keeps
    full precision when p is close to one. Requires 0 <= k < trials."""
    k = np.asarray(k, dtype=float)
    return reg_incomplete_beta(q, trials - k, k + 1)
