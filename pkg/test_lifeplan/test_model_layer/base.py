"""
Shared fixtures for the model layer tests.
"""
import os
import typing

import numpy as np

from lifeplan.model_layer import uhcs
from lifeplan.model_layer.lifetime_model import LogNormalParams

# Long Monte Carlo runs only execute when this is set.
SLOW_TESTS = os.environ.get('LIFEPLAN_SLOW_TESTS') == '1'
SLOW_REASON = "set LIFEPLAN_SLOW_TESTS=1 to run long Monte Carlo checks"

# The optimal plan for n = 20 with c_f = 10, c_t = 15 and c_b = 150 under the first preset prior.
REFERENCE_SCHEME = uhcs.SchemeParams(20, 13, 7, 0.7044, 1.4088)
PRIOR_MEAN_THETA = LogNormalParams(-0.5, 1.5)
UNIT_THETA = LogNormalParams(0.0, 1.0)

# (n, r, l) combinations used for the limiting-case identities.
REDUCTION_SIZES = ((10, 5, 2), (20, 13, 7), (30, 17, 9))


def frobenius_relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    return float(np.linalg.norm(actual - expected) / np.linalg.norm(expected))


def central_difference(function: typing.Callable[[LogNormalParams], float],
                       params: LogNormalParams, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of function in (mu, tau)."""
    mu, tau = params.mu, params.tau
    d_mu = (function(LogNormalParams(mu + step, tau))
            - function(LogNormalParams(mu - step, tau))) / (2 * step)
    d_tau = (function(LogNormalParams(mu, tau + step))
             - function(LogNormalParams(mu, tau - step))) / (2 * step)
    return np.array([d_mu, d_tau])


def reference_classification(lifetimes: typing.Sequence[float], scheme: uhcs.SchemeParams) \
        -> typing.Tuple[uhcs.Case, int, float]:
    """The stopping rule written out case by case."""
    x_l = lifetimes[scheme.l - 1]
    x_r = lifetimes[scheme.r - 1]
    T1, T2 = scheme.T1, scheme.T2

    def count(limit):
        return sum(1 for x in lifetimes if x <= limit)

    if x_r <= T1:
        return uhcs.Case.I, count(T1), T1
    if x_l <= T1 and x_r <= T2:
        return uhcs.Case.II, scheme.r, x_r
    if x_l <= T1:
        return uhcs.Case.III, count(T2), T2
    if x_r <= T2:
        return uhcs.Case.IV, scheme.r, x_r
    if x_l <= T2:
        return uhcs.Case.V, count(T2), T2
    return uhcs.Case.VI, scheme.l, x_l
