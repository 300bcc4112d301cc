"""
Search for the Bayesian optimal Type-II UHCS plan.

optimize_times() maximizes psi over (T1, T2) for fixed (n, r, l) under the budget constraint,
running COBYLA from a grid of starting points placed at prior-predictive lifetime quantiles.
algorithm_one() repeats this over every (n, r) cell with l = ceil(r / 2) and keeps the best plan.
"""
import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import optimize

from lifeplan.data_types import exceptions
from lifeplan.design_layer import bayes_design
from lifeplan.design_layer.bayes_design import CostModel, Criteria, DesignSolution
from lifeplan.design_layer.prior import PriorSample
from lifeplan.model_layer import uhcs

_logger = logging.getLogger(__name__)

FREE = 'free'
LINKED = 'linked'

# Quantile levels for T1 starts, and fractions of the remaining probability for T2 starts.
T1_START_LEVELS = (0.1, 0.25, 0.4, 0.55, 0.7)
T2_START_FRACTIONS = (0.2, 0.4, 0.6, 0.8, 0.95)

# Objective value returned for plans whose information matrix is singular for some draw.
DEGENERATE_PENALTY = 1e3


@dataclasses.dataclass(frozen=True)
class SearchOptions:
    """Settings of the time search and the grid search.

    mode is 'free' (search T1 and T2 > T1) or 'linked' (T2 = kappa T1). fixed_l replaces the
    l = ceil(r / 2) rule in algorithm_one()."""
    mode: str = FREE
    kappa: float = 2.0
    tolerance: float = 1e-4
    max_iterations: int = 400
    initial_step: float = 0.5
    workers: int = 1
    fixed_l: typing.Optional[int] = None

    def __post_init__(self):
        if self.mode not in (FREE, LINKED):
            raise exceptions.DomainError("Search mode must be %r or %r; got %r."
                                         % (FREE, LINKED, self.mode))
        if not self.kappa > 1:
            raise exceptions.DomainError("kappa must exceed 1; got %r." % (self.kappa,))
        if not (self.tolerance > 0 and self.initial_step > 0 and self.max_iterations >= 1):
            raise exceptions.DomainError("Invalid optimizer settings.")
        if self.workers < 1:
            raise exceptions.DomainError("workers must be at least 1; got %r." % (self.workers,))
        if self.fixed_l is not None and self.fixed_l < 1:
            raise exceptions.DomainError("l must be at least 1; got %r." % (self.fixed_l,))

    @property
    def label(self) -> str:
        if self.mode == LINKED:
            return '%s:%g' % (LINKED, self.kappa)
        return FREE

    def l_for(self, r: int) -> int:
        """The l used with r."""
        if self.fixed_l is not None:
            return self.fixed_l
        return math.ceil(r / 2)


DEFAULT_SEARCH = SearchOptions()


class _TimeProblem:
    """The objective and constraint of one (n, r, l) cell, in log coordinates, with every
    evaluation cached so COBYLA's repeated calls at one point are computed once."""

    def __init__(self, n: int, r: int, l: int, sample: PriorSample, cost: CostModel,
                 options: SearchOptions):
        self.template = uhcs.validate(uhcs.SchemeParams(n, r, l, 1.0, 2.0))
        self.context = bayes_design.design_context(sample, n)
        self.cost = cost
        self.options = options
        self._cache: typing.Dict[typing.Tuple[float, ...], typing.Optional[Criteria]] = {}

    def times(self, x: typing.Sequence[float]) -> typing.Tuple[float, float]:
        T1 = math.exp(x[0])
        if self.options.mode == LINKED:
            return T1, self.options.kappa * T1
        return T1, T1 + math.exp(x[1])

    def coordinates(self, T1: float, T2: float) -> typing.List[float]:
        if self.options.mode == LINKED:
            return [math.log(T1)]
        return [math.log(T1), math.log(T2 - T1)]

    def scheme(self, x: typing.Sequence[float]) -> uhcs.SchemeParams:
        T1, T2 = self.times(x)
        return self.template.replace(T1=T1, T2=T2)

    def criteria(self, x: typing.Sequence[float]) -> typing.Optional[Criteria]:
        key = tuple(float(value) for value in x)
        if key not in self._cache:
            try:
                self._cache[key] = self.context.evaluate(self.scheme(key))
            except (exceptions.DegenerateDesignError, exceptions.SchemeValidationError,
                    OverflowError):
                _logger.debug("No usable plan at log-times %r.", key)
                self._cache[key] = None
        return self._cache[key]

    def objective(self, x: np.ndarray) -> float:
        values = self.criteria(x)
        if values is None:
            return DEGENERATE_PENALTY
        return -values.psi

    def budget_margin(self, x: np.ndarray) -> float:
        """(c_b - cost) / c_b, nonnegative on feasible plans."""
        values = self.criteria(x)
        if values is None:
            return -1.0
        exp_cost = self.cost.total(values.psi_fail, values.psi_dur)
        if not math.isfinite(exp_cost):
            return -1.0
        return (self.cost.c_b - exp_cost) / self.cost.c_b

    def solution(self, x: typing.Sequence[float]) -> typing.Optional[DesignSolution]:
        values = self.criteria(x)
        if values is None:
            return None
        return DesignSolution.from_criteria(self.scheme(x), values, self.cost, self.options.label)


def start_points(sample: PriorSample, options: SearchOptions) \
        -> typing.List[typing.Tuple[float, float]]:
    """(T1, T2) starting pairs: T1 at predictive quantile levels q, and T2 at levels
    q + (1 - q) f for each fraction f, or at kappa T1 in linked mode."""
    starts = []
    for level in T1_START_LEVELS:
        T1 = sample.predictive_quantile(level)
        if options.mode == LINKED:
            starts.append((T1, options.kappa * T1))
            continue
        for fraction in T2_START_FRACTIONS:
            T2 = sample.predictive_quantile(level + (1 - level) * fraction)
            if T2 > T1:
                starts.append((T1, T2))
    return starts


def improves(candidate: DesignSolution, incumbent: DesignSolution, tolerance: float) -> bool:
    """Whether candidate beats incumbent among the end points of one cell's starts. Objectives
    within tolerance count as tied and the cheaper plan wins."""
    if abs(candidate.objective - incumbent.objective) <= tolerance:
        return candidate.exp_cost < incumbent.exp_cost
    return candidate.objective > incumbent.objective


def optimize_times(n: int, r: int, l: int, sample: PriorSample, cost: CostModel,
                   options: SearchOptions = DEFAULT_SEARCH) -> DesignSolution:
    """Maximize psi over (T1, T2) for fixed (n, r, l) subject to the budget. Infeasibility is
    reported through DesignSolution.feasible, never raised."""
    problem = _TimeProblem(n, r, l, sample, cost, options)
    best_feasible = None
    cheapest = None
    constraints = [{'type': 'ineq', 'fun': problem.budget_margin}]
    for T1, T2 in start_points(sample, options):
        x0 = np.array(problem.coordinates(T1, T2))
        result = optimize.minimize(problem.objective, x0, method='COBYLA', constraints=constraints,
                                   tol=options.tolerance,
                                   options={'rhobeg': options.initial_step,
                                            'maxiter': options.max_iterations})
        if not result.success:
            _logger.warning("COBYLA start (%.4f, %.4f) for (n=%d, r=%d, l=%d) ended: %s",
                            T1, T2, n, r, l, result.message)
        candidate = problem.solution(result.x)
        if candidate is None:
            continue
        _logger.debug("Start (%.4f, %.4f) -> %s objective=%.6f cost=%.4f feasible=%s",
                      T1, T2, candidate.scheme, candidate.objective, candidate.exp_cost,
                      candidate.feasible)
        if candidate.feasible:
            if best_feasible is None or improves(candidate, best_feasible, options.tolerance):
                best_feasible = candidate
        elif cheapest is None or candidate.exp_cost < cheapest.exp_cost:
            cheapest = candidate
    if best_feasible is not None:
        return best_feasible
    if cheapest is not None:
        return cheapest
    return DesignSolution.unsolved(problem.template, options.label)


def grid_cells(sample: PriorSample, cost: CostModel, n: typing.Optional[int] = None,
               n_max: typing.Optional[int] = None, options: SearchOptions = DEFAULT_SEARCH) \
        -> typing.List[typing.Tuple[int, int, int]]:
    """The (n, r, l) cells searched by algorithm_one(), in order."""
    if (n is None) == (n_max is None):
        raise exceptions.DomainError("Give exactly one of n and n_max.")
    if n is not None:
        sizes = [n]
    else:
        sizes = list(range(2, n_max + 1))
    if min(sizes) < 2:
        raise exceptions.DomainError("Sample sizes must be at least 2.")
    cells = []
    for size in sizes:
        for r in range(2, size + 1):
            l = options.l_for(r)
            if 1 <= l < r:
                cells.append((size, r, l))
    if not cells:
        raise exceptions.DomainError("l=%d leaves no cell with l < r <= n for n up to %d."
                                     % (options.fixed_l, max(sizes)))
    return cells


def solve_cell(n: int, r: int, l: int, sample: PriorSample, cost: CostModel,
               options: SearchOptions = DEFAULT_SEARCH) -> DesignSolution:
    """optimize_times() for one cell, skipping cells whose cheapest plan exceeds the budget."""
    context = bayes_design.design_context(sample, n)
    minimum = context.minimum_cost(l, cost)
    if not cost.within_budget(minimum):
        _logger.info("Cell (n=%d, r=%d, l=%d) skipped: cost is at least %.4f.", n, r, l, minimum)
        return DesignSolution.unsolved(uhcs.SchemeParams(n, r, l, 1.0, 2.0), options.label)
    _logger.info("Optimizing cell (n=%d, r=%d, l=%d).", n, r, l)
    return optimize_times(n, r, l, sample, cost, options)


# State of pool worker processes, set once per process by _initialize_worker.
_worker_state: typing.Optional[typing.Tuple[PriorSample, CostModel, SearchOptions]] = None


def _initialize_worker(sample: PriorSample, cost: CostModel, options: SearchOptions) -> None:
    global _worker_state
    _worker_state = (sample, cost, options)


def _solve_cell_in_worker(cell: typing.Tuple[int, int, int]) -> DesignSolution:
    assert _worker_state is not None
    sample, cost, options = _worker_state
    return solve_cell(*cell, sample, cost, options)


def iter_cell_solutions(sample: PriorSample, cost: CostModel, n: typing.Optional[int] = None,
                        n_max: typing.Optional[int] = None,
                        options: SearchOptions = DEFAULT_SEARCH) \
        -> typing.Iterator[DesignSolution]:
    """The solution of every cell, in grid order regardless of the number of workers."""
    cells = grid_cells(sample, cost, n, n_max, options)
    if options.workers == 1:
        for cell in cells:
            yield solve_cell(*cell, sample, cost, options)
        return
    with concurrent.futures.ProcessPoolExecutor(
            max_workers=options.workers, initializer=_initialize_worker,
            initargs=(sample, cost, options)) as executor:
        yield from executor.map(_solve_cell_in_worker, cells)


def algorithm_one(sample: PriorSample, cost: CostModel, n: typing.Optional[int] = None,
                  n_max: typing.Optional[int] = None,
                  options: SearchOptions = DEFAULT_SEARCH) -> DesignSolution:
    """The best plan over every (n, r) cell, for a fixed n or for n = 2..n_max. Ties go to the
    cheaper plan, then smaller n, then smaller r. If no cell is feasible the result has
    feasible=False."""
    best = None
    for solution in iter_cell_solutions(sample, cost, n, n_max, options):
        best = solution if best is None else bayes_design.better(best, solution)
    assert best is not None
    _logger.info("Best plan %s: objective=%.6f cost=%.4f feasible=%s", best.scheme,
                 best.objective, best.exp_cost, best.feasible)
    return best
