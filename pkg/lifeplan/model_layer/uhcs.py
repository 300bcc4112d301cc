"""
The Type-II unified hybrid censoring scheme (Type-II UHCS).

n units go on test. Given failure counts l < r and times T1 < T2, the test ends at

    xi = (X_{l:n} v T2) ^ (X_{r:n} v T1)

which guarantees at least l failures and, unless the l-th failure comes after T2, ends by T2.
Six orderings of X_{l:n}, X_{r:n}, T1 and T2 are possible:

    I    X_r <= T1                      stop at T1,      d = #{x <= T1} >= r
    II   X_l <= T1 < X_r <= T2          stop at X_r,     d = r
    III  X_l <= T1, X_r > T2            stop at T2,      d = #{x <= T2} in l..r-1
    IV   T1 < X_l, X_r <= T2            stop at X_r,     d = r
    V    T1 < X_l <= T2 < X_r           stop at T2,      d = #{x <= T2} in l..r-1
    VI   X_l > T2                       stop at X_l,     d = l

A failure exactly at a threshold counts as occurring before it.
"""
import concurrent.futures
import dataclasses
import enum
import logging
import math
import typing

import numpy as np
from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import FloatArray
from lifeplan.model_layer.lifetime_model import LogNormalParams
from lifeplan.numerics import special as nspecial

_logger = logging.getLogger(__name__)

# Replications are drawn in fixed-size chunks, chunk k from the k-th spawned seed stream, so the
# draws do not depend on how chunks are spread over workers.
SIMULATION_CHUNK_SIZE = 50_000


class Case(enum.IntEnum):
    """The six ways a Type-II UHCS experiment can terminate."""
    I = 1
    II = 2
    III = 3
    IV = 4
    V = 5
    VI = 6

    def __str__(self) -> str:
        return self.name


@dataclasses.dataclass(frozen=True)
class SchemeParams:
    """A Type-II UHCS design (n, r, l, T1, T2). Construction does not validate; call validate()."""
    n: int
    r: int
    l: int
    T1: float
    T2: float

    def __str__(self) -> str:
        return '(%d, %d, %d, %.4f, %.4f)' % (self.n, self.r, self.l, self.T1, self.T2)

    def replace(self, **changes) -> 'SchemeParams':
        """Return a copy with the given fields changed."""
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class UhcsOutcome:
    """The observed data (D, xi) of one experiment, with the failure times seen up to xi."""
    case_id: Case
    d: int
    xi: float
    observed_failures: typing.Tuple[float, ...]

    def to_record(self) -> str:
        """One line: case_id, d, xi, then the failure times, comma-separated."""
        fields = [str(self.case_id), str(self.d), repr(self.xi)]
        fields.extend(repr(x) for x in self.observed_failures)
        return ','.join(fields)

    @classmethod
    def from_record(cls, record: str) -> 'UhcsOutcome':
        """Inverse of to_record."""
        fields = [field.strip() for field in record.strip().split(',')]
        if len(fields) < 3:
            raise exceptions.DomainError("Malformed outcome record: %r" % (record,))
        try:
            case_id = Case[fields[0]]
            d = int(fields[1])
            xi = float(fields[2])
            failures = tuple(float(field) for field in fields[3:])
        except (KeyError, ValueError) as error:
            raise exceptions.DomainError("Malformed outcome record: %r" % (record,)) from error
        return cls(case_id, d, xi, failures)


def validate(scheme: SchemeParams) -> SchemeParams:
    """Return the scheme unchanged if 1 <= l < r <= n and 0 < T1 < T2. Otherwise raise a
    SchemeValidationError listing every violated invariant."""
    violations = []
    if scheme.n < 2:
        violations.append("n >= 2 violated (n=%r)" % (scheme.n,))
    if scheme.l < 1:
        violations.append("l >= 1 violated (l=%r)" % (scheme.l,))
    if scheme.l >= scheme.r:
        violations.append("l < r violated (l=%r, r=%r)" % (scheme.l, scheme.r))
    if scheme.r > scheme.n:
        violations.append("r <= n violated (r=%r, n=%r)" % (scheme.r, scheme.n))
    if not (math.isfinite(scheme.T1) and scheme.T1 > 0):
        violations.append("T1 > 0 violated (T1=%r)" % (scheme.T1,))
    if not (math.isfinite(scheme.T2) and scheme.T2 > 0):
        violations.append("T2 > 0 violated (T2=%r)" % (scheme.T2,))
    if not scheme.T1 < scheme.T2:
        violations.append("T1 < T2 violated (T1=%r, T2=%r)" % (scheme.T1, scheme.T2))
    if violations:
        raise exceptions.SchemeValidationError(violations)
    return scheme


def _check_lifetimes(lifetimes: FloatArray, scheme: SchemeParams) -> None:
    if lifetimes.shape[-1] != scheme.n:
        raise exceptions.DomainError("Expected %d lifetimes; got %d."
                                     % (scheme.n, lifetimes.shape[-1]))
    if not np.all(np.isfinite(lifetimes)) or np.any(lifetimes <= 0):
        raise exceptions.DomainError("Lifetimes must be finite and strictly positive.")
    if np.any(np.diff(lifetimes, axis=-1) < 0):
        raise exceptions.DomainError("Lifetimes must be sorted in ascending order.")


def _classify_arrays(lifetimes: FloatArray, scheme: SchemeParams) \
        -> typing.Tuple[np.ndarray, np.ndarray, FloatArray]:
    """Vectorized stopping rule over rows of sorted lifetimes."""
    x_l = lifetimes[:, scheme.l - 1]
    x_r = lifetimes[:, scheme.r - 1]
    t1, t2 = scheme.T1, scheme.T2

    case = np.select(
        [x_r <= t1,
         (x_l <= t1) & (x_r <= t2),
         x_l <= t1,
         x_r <= t2,
         x_l <= t2],
        [int(value) for value in (Case.I, Case.II, Case.III, Case.IV, Case.V)],
        default=int(Case.VI),
    ).astype(np.int8)

    xi = np.minimum(np.maximum(x_l, t2), np.maximum(x_r, t1))
    count_t1 = np.sum(lifetimes <= t1, axis=1)
    count_t2 = np.sum(lifetimes <= t2, axis=1)
    d = np.select(
        [case == Case.I, (case == Case.II) | (case == Case.IV), case == Case.VI],
        [count_t1, scheme.r, scheme.l],
        default=count_t2,
    )
    return case, d, xi


def classify(sorted_lifetimes: typing.Sequence[float], scheme: SchemeParams) -> UhcsOutcome:
    """Apply the stopping rule to one complete, sorted set of n lifetimes."""
    validate(scheme)
    lifetimes = np.asarray(sorted_lifetimes, dtype=float)
    if lifetimes.ndim != 1:
        raise exceptions.DomainError("Expected a flat list of lifetimes.")
    _check_lifetimes(lifetimes, scheme)
    case, d, xi = _classify_arrays(lifetimes[None, :], scheme)
    d0 = int(d[0])
    return UhcsOutcome(Case(int(case[0])), d0, float(xi[0]),
                       tuple(float(x) for x in lifetimes[:d0]))


def _generator(seed: typing.Union[int, np.random.SeedSequence]) -> np.random.Generator:
    # Philox is counter-based, so streams are fully determined by the seed on every platform.
    return np.random.Generator(np.random.Philox(seed))


def draw_lifetimes(params: LogNormalParams, size: typing.Tuple[int, ...],
                   rng: np.random.Generator) -> FloatArray:
    """Draw LN(mu, tau) lifetimes as exp(mu + Z / sqrt(tau))."""
    return np.exp(params.mu + params.sigma * rng.standard_normal(size))


def simulate(scheme: SchemeParams, params: LogNormalParams, seed: int) -> UhcsOutcome:
    """Run one experiment: draw n lifetimes from a generator seeded by seed, sort, classify."""
    validate(scheme)
    lifetimes = np.sort(draw_lifetimes(params, (scheme.n,), _generator(seed)))
    return classify(lifetimes, scheme)


def check_outcome(outcome: UhcsOutcome, scheme: SchemeParams) -> None:
    """Raise InconsistentOutcomeError unless the outcome could have come from the scheme."""
    validate(scheme)
    failures = outcome.observed_failures
    if outcome.d != len(failures):
        raise exceptions.InconsistentOutcomeError(
            "d=%d but %d failure times were given." % (outcome.d, len(failures)))
    if not scheme.l <= outcome.d <= scheme.n:
        raise exceptions.InconsistentOutcomeError(
            "The scheme guarantees between %d and %d failures; got d=%d."
            % (scheme.l, scheme.n, outcome.d))
    if not (math.isfinite(outcome.xi) and outcome.xi > 0):
        raise exceptions.InconsistentOutcomeError("xi must be positive; got %r." % (outcome.xi,))
    if any(not x > 0 for x in failures):
        raise exceptions.InconsistentOutcomeError("Failure times must be positive.")
    if any(x > outcome.xi for x in failures):
        raise exceptions.InconsistentOutcomeError("A failure time exceeds xi=%r." % (outcome.xi,))
    problem = _case_violation(outcome, scheme)
    if problem:
        raise exceptions.InconsistentOutcomeError(
            "Case %s: %s (d=%d, xi=%r)." % (outcome.case_id, problem, outcome.d, outcome.xi))


def _case_violation(outcome: UhcsOutcome, scheme: SchemeParams) -> typing.Optional[str]:
    """The stopping rule the outcome breaks, if any."""
    case, d, xi = outcome.case_id, outcome.d, outcome.xi
    last = outcome.observed_failures[-1]
    if case == Case.I:
        if d < scheme.r:
            return "expected at least r=%d failures" % (scheme.r,)
        if xi != scheme.T1:
            return "expected xi = T1"
    elif case in (Case.II, Case.IV):
        if d != scheme.r:
            return "expected exactly r=%d failures" % (scheme.r,)
        if xi != last or xi > scheme.T2:
            return "expected xi at the r-th failure, no later than T2"
    elif case in (Case.III, Case.V):
        if d >= scheme.r:
            return "expected fewer than r=%d failures" % (scheme.r,)
        if xi != scheme.T2:
            return "expected xi = T2"
    else:
        if d != scheme.l:
            return "expected exactly l=%d failures" % (scheme.l,)
        if xi != last or xi <= scheme.T2:
            return "expected xi at the l-th failure, after T2"
    return None


def log_likelihood(outcome: UhcsOutcome, scheme: SchemeParams, params: LogNormalParams) -> float:
    """sum_{i<=d} ln f(x_i) + (n - d) ln(1 - F(xi)), without the constant permutation factor."""
    check_outcome(outcome, scheme)
    x = np.asarray(outcome.observed_failures, dtype=float)
    z = params.standardize(x)
    result = float(np.sum(nspecial.log_std_normal_pdf(z) + 0.5 * math.log(params.tau) - np.log(x)))
    survivors = scheme.n - outcome.d
    if survivors:
        result += survivors * nspecial.log_std_normal_sf(params.standardize(outcome.xi))
    return result


def score(outcome: UhcsOutcome, scheme: SchemeParams, params: LogNormalParams) -> FloatArray:
    """The gradient of log_likelihood in (mu, tau)."""
    check_outcome(outcome, scheme)
    lifetimes = np.zeros((1, scheme.n))
    lifetimes[0, :outcome.d] = outcome.observed_failures
    return censored_score(lifetimes, np.array([outcome.d]), np.array([outcome.xi]), params)[0]


def censored_score(lifetimes: FloatArray, d: np.ndarray, xi: FloatArray,
                   params: LogNormalParams) -> FloatArray:
    """Score vectors for many right-censored samples at once. Row k uses the first d[k] entries of
    lifetimes[k] as failures and censors the remaining units at xi[k]. Entries beyond d[k] are
    ignored. Returns shape (rows, 2).

    With z the standardized log-time,

        d/d mu:   sum_i sqrt(tau) z_i     + (n - d) sqrt(tau) lambda(z_xi)
        d/d tau:  sum_i (1 - z_i^2)/(2 tau) - (n - d) z_xi lambda(z_xi) / (2 tau)
    """
    n = lifetimes.shape[1]
    root_tau = math.sqrt(params.tau)
    observed = np.arange(n)[None, :] < d[:, None]
    safe = np.where(observed, lifetimes, 1.0)
    z = np.where(observed, root_tau * (np.log(safe) - params.mu), 0.0)
    z_xi = root_tau * (np.log(xi) - params.mu)
    hazard = np.asarray(nspecial.std_normal_hazard(z_xi))
    survivors = n - d
    d_mu = root_tau * (np.sum(z, axis=1) + survivors * hazard)
    d_tau = (np.sum(np.where(observed, 1 - z * z, 0.0), axis=1)
             - survivors * z_xi * hazard) / (2 * params.tau)
    return np.stack([d_mu, d_tau], axis=-1)


@dataclasses.dataclass(frozen=True, eq=False)
class OutcomeBatch:
    """Many simulated outcomes, stored column-wise. lifetimes holds the complete sorted samples,
    of which only the first d[k] entries of row k are observed."""
    case_id: np.ndarray
    d: np.ndarray
    xi: FloatArray
    lifetimes: FloatArray

    def __len__(self) -> int:
        return len(self.d)

    def outcome(self, k: int) -> UhcsOutcome:
        """The k-th outcome as a UhcsOutcome."""
        d = int(self.d[k])
        return UhcsOutcome(Case(int(self.case_id[k])), d, float(self.xi[k]),
                           tuple(float(x) for x in self.lifetimes[k, :d]))

    @classmethod
    def concatenate(cls, batches: typing.Sequence['OutcomeBatch']) -> 'OutcomeBatch':
        """Join batches in order."""
        return cls(np.concatenate([b.case_id for b in batches]),
                   np.concatenate([b.d for b in batches]),
                   np.concatenate([b.xi for b in batches]),
                   np.concatenate([b.lifetimes for b in batches]))


def classify_batch(sorted_lifetimes: FloatArray, scheme: SchemeParams) -> OutcomeBatch:
    """classify() applied to every row of a (reps, n) array of sorted lifetimes."""
    validate(scheme)
    lifetimes = np.asarray(sorted_lifetimes, dtype=float)
    if lifetimes.ndim != 2:
        raise exceptions.DomainError("Expected a two-dimensional array of lifetimes.")
    _check_lifetimes(lifetimes, scheme)
    case, d, xi = _classify_arrays(lifetimes, scheme)
    return OutcomeBatch(case, d, xi, lifetimes)


def score_batch(batch: OutcomeBatch, params: LogNormalParams) -> FloatArray:
    """score() for every outcome in the batch, shape (reps, 2)."""
    return censored_score(batch.lifetimes, batch.d, batch.xi, params)


def _chunk_sizes(reps: int, chunk_size: int) -> typing.List[int]:
    full, remainder = divmod(reps, chunk_size)
    return [chunk_size] * full + ([remainder] if remainder else [])


def iter_simulations(scheme: SchemeParams, params: LogNormalParams, reps: int, seed: int,
                     workers: int = 1,
                     chunk_size: int = SIMULATION_CHUNK_SIZE) -> typing.Iterator[OutcomeBatch]:
    """Simulate reps experiments, yielding them chunk by chunk in a fixed order. Chunk k draws from
    the k-th child of SeedSequence(seed), so the output does not depend on workers."""
    validate(scheme)
    if reps < 1:
        raise exceptions.DomainError("reps must be at least 1; got %r." % (reps,))
    sizes = _chunk_sizes(reps, chunk_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run_chunk(k: int) -> OutcomeBatch:
        lifetimes = np.sort(draw_lifetimes(params, (sizes[k], scheme.n), _generator(streams[k])),
                            axis=1)
        case, d, xi = _classify_arrays(lifetimes, scheme)
        return OutcomeBatch(case, d, xi, lifetimes)

    if workers <= 1:
        for k in range(len(sizes)):
            yield run_chunk(k)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            yield from executor.map(run_chunk, range(len(sizes)))


def simulate_batch(scheme: SchemeParams, params: LogNormalParams, reps: int, seed: int,
                   workers: int = 1) -> OutcomeBatch:
    """All of iter_simulations() joined into one batch."""
    return OutcomeBatch.concatenate(list(iter_simulations(scheme, params, reps, seed, workers)))


@dataclasses.dataclass(frozen=True)
class SimulationSummary:
    """Empirical moments of D and xi over a run of simulated experiments."""
    reps: int
    mean_d: float
    se_d: float
    mean_xi: float
    se_xi: float
    case_counts: typing.Dict[Case, int]
    case_frequencies: typing.Dict[Case, float]


def summarize(scheme: SchemeParams, params: LogNormalParams, reps: int, seed: int,
              workers: int = 1) -> SimulationSummary:
    """Simulate reps experiments and accumulate the mean and standard error of D and xi and the
    frequency of each termination case. Memory use is bounded by the chunk size."""
    _logger.info("Simulating %d experiments of scheme %s at %s.", reps, scheme, params)
    count = 0
    sum_d = sum_d2 = sum_xi = sum_xi2 = 0.0
    case_counts = np.zeros(len(Case) + 1, dtype=np.int64)
    for batch in iter_simulations(scheme, params, reps, seed, workers):
        d = batch.d.astype(float)
        count += len(batch)
        sum_d += float(np.sum(d))
        sum_d2 += float(np.sum(d * d))
        sum_xi += float(np.sum(batch.xi))
        sum_xi2 += float(np.sum(batch.xi * batch.xi))
        case_counts += np.bincount(batch.case_id, minlength=len(Case) + 1)
    mean_d = sum_d / count
    mean_xi = sum_xi / count
    if count > 1:
        se_d = math.sqrt(max(sum_d2 / count - mean_d ** 2, 0.0) / (count - 1))
        se_xi = math.sqrt(max(sum_xi2 / count - mean_xi ** 2, 0.0) / (count - 1))
    else:
        se_d = se_xi = float('nan')
    counts = {case: int(case_counts[case]) for case in Case}
    frequencies = {case: counts[case] / count for case in Case}
    return SimulationSummary(count, mean_d, se_d, mean_xi, se_xi, counts, frequencies)
