"""
Shared fixtures for the design layer tests.
"""
import functools

from lifeplan.design_layer import prior
from lifeplan.design_layer.bayes_design import CostModel
from test_lifeplan.test_model_layer.base import SLOW_REASON, SLOW_TESTS  # noqa: F401

SEED = 4242

# Cost per failure and per unit of test time in the reference designs.
TABLE_COSTS = (10.0, 15.0)


def table_cost(budget: float) -> CostModel:
    return CostModel(TABLE_COSTS[0], TABLE_COSTS[1], budget)


@functools.lru_cache(maxsize=None)
def small_sample(draws: int = 60, seed: int = SEED) -> prior.PriorSample:
    """A small, shared draw from the first preset prior, for fast optimizer tests."""
    return prior.sample_prior(prior.PRIOR_1, draws, seed)
