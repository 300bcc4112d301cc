"""
Prior-averaged design criteria for Type-II UHCS plans:

    psi      = mean_k ln det I(theta_k)
    psi_fail = mean_k E[D | theta_k]
    psi_dur  = mean_k E[xi | theta_k]

over a fixed PriorSample, and the test cost c_f psi_fail + c_t psi_dur.
"""
import dataclasses
import functools
import logging
import math
import typing

import numpy as np

from lifeplan.data_types import exceptions
from lifeplan.model_layer import expectations
from lifeplan.model_layer import fisher
from lifeplan.model_layer import uhcs
from lifeplan.design_layer.prior import PriorSample

_logger = logging.getLogger(__name__)

# Relative slack on the budget when deciding feasibility.
BUDGET_SLACK = 1e-6


@dataclasses.dataclass(frozen=True)
class CostModel:
    """Cost per failed unit c_f, cost per unit of test time c_t, and the budget c_b."""
    c_f: float
    c_t: float
    c_b: float

    def __post_init__(self):
        for name in ('c_f', 'c_t', 'c_b'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise exceptions.DomainError("%s must be positive and finite; got %r."
                                             % (name, value))

    def total(self, exp_failures: float, exp_duration: float) -> float:
        return self.c_f * exp_failures + self.c_t * exp_duration

    def within_budget(self, exp_cost: float) -> bool:
        return exp_cost <= self.c_b * (1 + BUDGET_SLACK)

    def with_budget(self, c_b: float) -> 'CostModel':
        return dataclasses.replace(self, c_b=c_b)


class Criteria(typing.NamedTuple):
    """The prior-averaged criteria of one plan, with the Monte Carlo standard error of psi."""
    psi: float
    psi_fail: float
    psi_dur: float
    psi_se: float


@dataclasses.dataclass(frozen=True)
class DesignSolution:
    """An evaluated plan. feasible holds exactly when exp_cost is within the budget."""
    scheme: uhcs.SchemeParams
    objective: float
    objective_se: float
    exp_failures: float
    exp_duration: float
    exp_cost: float
    feasible: bool
    mode: str = 'free'

    @classmethod
    def from_criteria(cls, scheme: uhcs.SchemeParams, values: Criteria, cost: CostModel,
                      mode: str = 'free') -> 'DesignSolution':
        exp_cost = cost.total(values.psi_fail, values.psi_dur)
        return cls(scheme, values.psi, values.psi_se, values.psi_fail, values.psi_dur, exp_cost,
                   cost.within_budget(exp_cost), mode)

    @classmethod
    def unsolved(cls, scheme: uhcs.SchemeParams, mode: str = 'free') -> 'DesignSolution':
        """Placeholder for a cell in which no plan could be evaluated."""
        return cls(scheme, -math.inf, math.nan, math.nan, math.nan, math.inf, False, mode)

    def sort_key(self) -> typing.Tuple[float, float, int, int]:
        """Better solutions sort first: larger objective, then smaller cost, smaller n and
        smaller r."""
        return (-self.objective, self.exp_cost, self.scheme.n, self.scheme.r)

    def as_row(self) -> typing.Dict[str, typing.Any]:
        return {
            'n': self.scheme.n,
            'r': self.scheme.r,
            'l': self.scheme.l,
            'T1': self.scheme.T1,
            'T2': self.scheme.T2,
            'objective': self.objective,
            'objective_se': self.objective_se,
            'exp_failures': self.exp_failures,
            'exp_duration': self.exp_duration,
            'exp_cost': self.exp_cost,
            'feasible': self.feasible,
            'mode': self.mode,
        }


def better(first: DesignSolution, second: DesignSolution) -> DesignSolution:
    """The preferred of two solutions. Feasible beats infeasible, then sort_key() decides. On a
    full tie the first is kept."""
    if first.feasible != second.feasible:
        return first if first.feasible else second
    return second if second.sort_key() < first.sort_key() else first


class DesignContext:
    """Tables shared by every plan with sample size n evaluated against one PriorSample."""

    def __init__(self, sample: PriorSample, n: int):
        self.sample = sample
        self.n = n
        self.fisher_table = fisher.fisher_table(n)
        self.expectation_table = expectations.ExpectationTable(sample.mu, sample.tau, n)

    def evaluate(self, scheme: uhcs.SchemeParams) -> Criteria:
        """The criteria of one plan. A plan whose information is singular under any draw raises
        DegenerateDesignError."""
        log_dets = self.fisher_table.uhcs_log_det(scheme, self.sample.mu, self.sample.tau)
        failures = self.expectation_table.expected_failures(scheme)
        durations = self.expectation_table.expected_duration(scheme)
        return _summarize(log_dets, failures, durations)

    def minimum_cost(self, l: int, cost: CostModel) -> float:
        """The infimum over (T1, T2) of the cost of plans with this n and l, attained as both times
        shrink to zero: every test then stops at the l-th failure."""
        mean_time = float(np.mean(self.expectation_table.order_stat_mean(l)))
        return cost.total(l, mean_time)


@functools.lru_cache(maxsize=2)
def design_context(sample: PriorSample, n: int) -> DesignContext:
    """The shared DesignContext for (sample, n)."""
    _logger.info("Building design tables for n=%d over %d prior draws.", n, len(sample))
    return DesignContext(sample, n)


def _summarize(log_dets: np.ndarray, failures: np.ndarray, durations: np.ndarray) -> Criteria:
    count = len(log_dets)
    psi_se = float(np.std(log_dets, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return Criteria(float(np.mean(log_dets)), float(np.mean(failures)),
                    float(np.mean(durations)), psi_se)


def criteria(scheme: uhcs.SchemeParams, sample: PriorSample, exact: bool = False) -> Criteria:
    """psi, psi_fail and psi_dur of a plan, averaged over the prior draws.

    By default the tabulated batch path is used. With exact=True every draw is evaluated with the
    adaptive quadrature of the model layer instead."""
    uhcs.validate(scheme)
    if not exact:
        return design_context(sample, scheme.n).evaluate(scheme)
    log_dets, failures, durations = [], [], []
    for params in sample.draws:
        log_dets.append(fisher.log_det(fisher.fisher_uhcs(scheme, params)))
        failures.append(expectations.expected_failures(scheme, params))
        durations.append(expectations.expected_duration(scheme, params))
    return _summarize(np.array(log_dets), np.array(failures), np.array(durations))


def expected_cost(scheme: uhcs.SchemeParams, sample: PriorSample, cost: CostModel,
                  exact: bool = False) -> float:
    """c_f psi_fail + c_t psi_dur."""
    values = criteria(scheme, sample, exact)
    return cost.total(values.psi_fail, values.psi_dur)


def evaluate(scheme: uhcs.SchemeParams, sample: PriorSample, cost: CostModel,
             mode: str = 'free') -> DesignSolution:
    """A plan and its criteria, as a DesignSolution."""
    return DesignSolution.from_criteria(scheme, criteria(scheme, sample), cost, mode)
