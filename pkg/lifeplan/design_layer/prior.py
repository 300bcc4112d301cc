"""
The normal-gamma prior on theta = (mu, tau):

    tau      ~ Gamma(shape a1, rate b1)
    mu | tau ~ Normal(p2, variance 1 / (tau q2))

Priors are usually specified by the means and variances of mu and tau and converted to
hyperparameters with elicit().
"""
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import optimize
from scipy import special
from scipy import stats

from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import ArrayLike, FloatArray
from lifeplan.model_layer.lifetime_model import LogNormalParams

_logger = logging.getLogger(__name__)


class PriorMoments(typing.NamedTuple):
    """Marginal means and variances of mu and tau."""
    mean_mu: float
    var_mu: float
    mean_tau: float
    var_tau: float


@dataclasses.dataclass(frozen=True)
class NormalGammaPrior:
    """Hyperparameters (a1, b1, p2, q2) of the joint prior of (mu, tau)."""
    a1: float
    b1: float
    p2: float
    q2: float

    def __post_init__(self):
        if not self.a1 > 1:
            raise exceptions.PriorElicitationError(
                "Shape a1 must exceed 1, or the prior variance of mu is undefined; got %r."
                % (self.a1,))
        if not self.b1 > 0:
            raise exceptions.PriorElicitationError("Rate b1 must be positive; got %r." % (self.b1,))
        if not math.isfinite(self.p2):
            raise exceptions.PriorElicitationError("Location p2 must be finite; got %r."
                                                   % (self.p2,))
        if not self.q2 > 0:
            raise exceptions.PriorElicitationError("Precision multiplier q2 must be positive; "
                                                   "got %r." % (self.q2,))

    def __str__(self) -> str:
        return 'a1=%f b1=%f p2=%f q2=%f' % (self.a1, self.b1, self.p2, self.q2)

    def moments(self) -> PriorMoments:
        """The marginal moments this prior implies. Inverse of elicit()."""
        return PriorMoments(
            mean_mu=self.p2,
            var_mu=self.b1 / (self.q2 * (self.a1 - 1)),
            mean_tau=self.a1 / self.b1,
            var_tau=self.a1 / self.b1 ** 2,
        )

    @property
    def mean_params(self) -> LogNormalParams:
        """The prior mean of theta."""
        return LogNormalParams(self.p2, self.a1 / self.b1)

    def _predictive_scale(self) -> float:
        # ln X given tau is normal with precision tau q2 / (1 + q2); mixing over tau gives a
        # Student t with 2 a1 degrees of freedom.
        return math.sqrt(self.b1 * (1 + self.q2) / (self.a1 * self.q2))

    def predictive_cdf(self, x: ArrayLike):
        """P(X <= x) for a lifetime X drawn from the prior predictive distribution."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)):
            raise exceptions.DomainError("Lifetimes must be strictly positive.")
        result = stats.t.cdf((np.log(x) - self.p2) / self._predictive_scale(), df=2 * self.a1)
        return float(result) if np.ndim(result) == 0 else result

    def predictive_quantile(self, p: ArrayLike):
        """The p-quantile of the prior predictive lifetime distribution."""
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0) | (p >= 1)):
            raise exceptions.DomainError("Quantile levels must lie in (0, 1).")
        result = np.exp(self.p2 + self._predictive_scale() * stats.t.ppf(p, df=2 * self.a1))
        return float(result) if np.ndim(result) == 0 else result


def elicit(mean_mu: float, var_mu: float, mean_tau: float, var_tau: float) -> NormalGammaPrior:
    """Match the marginal moments of (mu, tau):

        a1 = mean_tau^2 / var_tau,  b1 = mean_tau / var_tau,  p2 = mean_mu,
        q2 = b1 / ((a1 - 1) var_mu)
    """
    if not (var_mu > 0 and mean_tau > 0 and var_tau > 0):
        raise exceptions.PriorElicitationError(
            "var_mu, mean_tau and var_tau must be positive; got %r, %r, %r."
            % (var_mu, mean_tau, var_tau))
    a1 = mean_tau ** 2 / var_tau
    if not a1 > 1:
        raise exceptions.PriorElicitationError(
            "Prior variance of mu undefined: var_tau (%r) must be below mean_tau^2 (%r)."
            % (var_tau, mean_tau ** 2))
    b1 = mean_tau / var_tau
    return NormalGammaPrior(a1, b1, mean_mu, b1 / ((a1 - 1) * var_mu))


PRIOR_1_MOMENTS = PriorMoments(-0.5, 0.5, 1.5, 1.0)
PRIOR_2_MOMENTS = PriorMoments(0.01, 0.05, 0.5, 0.05)

PRIOR_1 = elicit(*PRIOR_1_MOMENTS)
PRIOR_2 = elicit(*PRIOR_2_MOMENTS)

PRESETS: typing.Dict[str, NormalGammaPrior] = {
    'prior1': PRIOR_1,
    'prior2': PRIOR_2,
}


@dataclasses.dataclass(frozen=True, eq=False)
class PriorSample:
    """A fixed set of N prior draws, shared by every candidate design so that the design criteria
    are deterministic functions of the design. Instances hash by identity."""
    mu: FloatArray
    tau: FloatArray
    seed: int

    def __post_init__(self):
        if self.mu.shape != self.tau.shape or self.mu.ndim != 1 or len(self.mu) < 1:
            raise exceptions.DomainError("A prior sample needs matching, nonempty mu and tau.")
        if np.any(~(self.tau > 0)):
            raise exceptions.DomainError("Every tau in a prior sample must be positive.")
        self.mu.setflags(write=False)
        self.tau.setflags(write=False)

    def __len__(self) -> int:
        return len(self.mu)

    @property
    def n_draws(self) -> int:
        return len(self.mu)

    @property
    def draws(self) -> typing.List[LogNormalParams]:
        return [LogNormalParams(float(mu), float(tau)) for mu, tau in zip(self.mu, self.tau)]

    @classmethod
    def single(cls, params: LogNormalParams, seed: int = 0) -> 'PriorSample':
        """A one-draw sample concentrated at params."""
        return cls(np.array([params.mu]), np.array([params.tau]), seed)

    def predictive_cdf(self, x: float) -> float:
        """The predictive lifetime CDF implied by the draws, mean of F(x; theta_k)."""
        if not x > 0:
            raise exceptions.DomainError("Lifetimes must be strictly positive; got %r." % (x,))
        return float(np.mean(special.ndtr(np.sqrt(self.tau) * (math.log(x) - self.mu))))

    def predictive_quantile(self, p: float) -> float:
        """Inverse of predictive_cdf. The root is bracketed by the smallest and largest of the
        per-draw p-quantiles."""
        if not 0 < p < 1:
            raise exceptions.DomainError("Quantile level must lie in (0, 1); got %r." % (p,))
        per_draw = self.mu + special.ndtri(p) / np.sqrt(self.tau)
        low, high = float(np.min(per_draw)), float(np.max(per_draw))
        if high - low < 1e-12:
            return math.exp(low)

        def excess(log_x: float) -> float:
            return float(np.mean(special.ndtr(np.sqrt(self.tau) * (log_x - self.mu)))) - p

        return math.exp(optimize.brentq(excess, low, high, xtol=1e-12))


def sample_prior(prior: NormalGammaPrior, n_draws: int, seed: int) -> PriorSample:
    """Draw tau_k ~ Gamma(a1, rate b1), then mu_k | tau_k ~ Normal(p2, 1 / (tau_k q2)),
    deterministically in seed."""
    if n_draws < 1:
        raise exceptions.DomainError("n_draws must be at least 1; got %r." % (n_draws,))
    rng = np.random.Generator(np.random.Philox(seed))
    tau = rng.gamma(prior.a1, 1 / prior.b1, size=n_draws)
    # Gamma draws with shape above 1 are strictly positive.
    assert np.all(tau > 0)
    mu = rng.normal(prior.p2, 1 / np.sqrt(tau * prior.q2))
    _logger.debug("Drew %d prior samples from %s with seed %d.", n_draws, prior, seed)
    return PriorSample(mu, tau, seed)
