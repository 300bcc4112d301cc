"""
Fisher information about theta = (mu, tau) in Type-II UHCS data.

The information is assembled from hazard-weighted integrals. Writing <A> for A A' and
W_k = sum_{i=1..k} f_{i:n},

    I_{1..k:n}      = int_0^inf <d ln h> W_k dx          Type-II censoring at the k-th failure
    I_{X_{k:n} ^ T} = int_0^T   <d ln h> W_k dx          Type-I hybrid censoring (k, T)
    I_{T1}          = I_{X_{n:n} ^ T1}                   Type-I censoring of all n units at T1

and

    I = I_{1..l:n} + I_{T1} + I_{X_{r:n} ^ T2} - I_{X_{l:n} ^ T2} - I_{X_{r:n} ^ T1}.

For the log-normal model each integral factors as D J D with D = diag(sqrt(tau), 1/(2 tau)) and
J a theta-free matrix that depends on the upper limit only through z = sqrt(tau) (ln T - mu).
The scalar functions integrate J adaptively. FisherTable tabulates J once per n and serves
whole arrays of parameter draws.
"""
import dataclasses
import functools
import logging
import math
import typing

import numpy as np

from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import ArrayLike, FloatArray
from lifeplan.model_layer import lifetime_model
from lifeplan.model_layer import uhcs
from lifeplan.model_layer.lifetime_model import LogNormalParams, OrderStatIndex
from lifeplan.numerics import quadrature

_logger = logging.getLogger(__name__)

# Negative determinants or eigenvalues down to this size are quadrature noise and are clamped.
PSD_SLACK = 1e-9


@dataclasses.dataclass(frozen=True)
class FisherMatrix:
    """A symmetric 2x2 information matrix in (mu, tau)."""
    i_mm: float
    i_tt: float
    i_mt: float

    def __add__(self, other: 'FisherMatrix') -> 'FisherMatrix':
        if not isinstance(other, FisherMatrix):
            return NotImplemented
        return FisherMatrix(self.i_mm + other.i_mm, self.i_tt + other.i_tt,
                            self.i_mt + other.i_mt)

    def __sub__(self, other: 'FisherMatrix') -> 'FisherMatrix':
        if not isinstance(other, FisherMatrix):
            return NotImplemented
        return FisherMatrix(self.i_mm - other.i_mm, self.i_tt - other.i_tt,
                            self.i_mt - other.i_mt)

    def scaled(self, factor: float) -> 'FisherMatrix':
        """Every entry multiplied by factor."""
        return FisherMatrix(factor * self.i_mm, factor * self.i_tt, factor * self.i_mt)

    @property
    def determinant(self) -> float:
        return self.i_mm * self.i_tt - self.i_mt * self.i_mt

    def as_array(self) -> FloatArray:
        """The full 2x2 matrix."""
        return np.array([[self.i_mm, self.i_mt], [self.i_mt, self.i_tt]])

    @classmethod
    def from_array(cls, matrix: ArrayLike) -> 'FisherMatrix':
        """Build from a 2x2 array, symmetrizing it."""
        matrix = np.asarray(matrix, dtype=float)
        return cls(float(matrix[0, 0]), float(matrix[1, 1]),
                   float(0.5 * (matrix[0, 1] + matrix[1, 0])))

    def eigenvalues(self) -> FloatArray:
        """Ascending eigenvalues."""
        return np.linalg.eigvalsh(self.as_array())


def _scale(params: LogNormalParams) -> FloatArray:
    return np.array([math.sqrt(params.tau), 1 / (2 * params.tau)])


def _from_reduced(reduced: FloatArray, params: LogNormalParams) -> FisherMatrix:
    """D J D, with J given by its (mm, mt, tt) components."""
    s_mu, s_tau = _scale(params)
    return FisherMatrix(reduced[0] * s_mu * s_mu, reduced[2] * s_tau * s_tau,
                        reduced[1] * s_mu * s_tau)


def _outer_components(factors: FloatArray) -> FloatArray:
    a, b = factors[..., 0], factors[..., 1]
    return np.stack([a * a, a * b, b * b], axis=-1)


def reduced_information(rank: int, n: int, z_upper: float,
                        spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) \
        -> FloatArray:
    """The theta-free components (J_mm, J_mt, J_tt) of int_{-inf}^{z_upper} <(a, b)> W_rank dz,
    integrated adaptively with one vector-valued integrand."""
    OrderStatIndex(rank, n)
    upper = min(z_upper, quadrature.Z_MAX)
    if upper <= -quadrature.Z_MAX:
        return np.zeros(3)

    def integrand(z: float) -> FloatArray:
        components = _outer_components(lifetime_model.hazard_score_z(z))
        return components * float(lifetime_model.order_stat_weight_z(z, rank, n))

    return np.asarray(quadrature.integrate(integrand, -quadrature.Z_MAX, upper, spec))


def info_hybrid(rank: int, T: float, n: int, params: LogNormalParams,
                spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> FisherMatrix:
    """I_{X_{rank:n} ^ T}: information in Type-I hybrid censored data stopped at
    min(X_{rank:n}, T)."""
    OrderStatIndex(rank, n)
    if not T > 0:
        raise exceptions.DomainError("T must be positive; got %r." % (T,))
    z_upper = math.inf if math.isinf(T) else float(params.standardize(T))
    return _from_reduced(reduced_information(rank, n, z_upper, spec), params)


def info_type2(l: int, n: int, params: LogNormalParams,
               spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> FisherMatrix:
    """I_{1..l:n}: information in Type-II censored data stopped at the l-th failure."""
    return info_hybrid(l, math.inf, n, params, spec)


def info_t1_full(T1: float, n: int, params: LogNormalParams,
                 spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> FisherMatrix:
    """I_{T1}: information in all n units Type-I censored at T1."""
    return info_hybrid(n, T1, n, params, spec)


def ensure_psd(matrix: FisherMatrix, context: object = None) -> FisherMatrix:
    """Return the matrix, clamped onto the PSD cone if its smallest eigenvalue is negative by no
    more than PSD_SLACK. Larger violations raise FisherConsistencyError."""
    values, vectors = np.linalg.eigh(matrix.as_array())
    if values[0] >= 0:
        return matrix
    if values[0] < -PSD_SLACK:
        raise exceptions.FisherConsistencyError(
            "Fisher information for %s has eigenvalue %r." % (context, values[0]))
    _logger.warning("Clamping eigenvalue %r of the Fisher information for %s.", values[0], context)
    clamped = vectors @ np.diag(np.maximum(values, 0.0)) @ vectors.T
    return FisherMatrix.from_array(clamped)


def fisher_uhcs(scheme: uhcs.SchemeParams, params: LogNormalParams,
                spec: quadrature.QuadratureSpec = quadrature.DEFAULT_QUADRATURE) -> FisherMatrix:
    """The Fisher information in Type-II UHCS data, summed in a fixed order."""
    uhcs.validate(scheme)
    n, r, l = scheme.n, scheme.r, scheme.l
    total = reduce_matrices([
        info_type2(l, n, params, spec),
        info_t1_full(scheme.T1, n, params, spec),
        info_hybrid(r, scheme.T2, n, params, spec),
        info_hybrid(l, scheme.T2, n, params, spec).scaled(-1),
        info_hybrid(r, scheme.T1, n, params, spec).scaled(-1),
    ])
    return ensure_psd(total, scheme)


def log_det(m: FisherMatrix) -> float:
    """ln det I."""
    determinant = m.determinant
    if not determinant > 0:
        raise exceptions.DegenerateDesignError(
            "Fisher information is singular (determinant %r)." % (determinant,))
    return math.log(determinant)


class FisherTable:
    """Cumulative theta-free information integrals J(rank, z) for a fixed n, for every rank
    1..n, tabulated over a panel grid on [-Z_MAX, Z_MAX]. Use fisher_table() to share one
    instance per n."""

    def __init__(self, n: int, panel_width: float = 1 / 16, panel_order: int = 8):
        if n < 1:
            raise exceptions.DomainError("Sample size must be at least 1; got %r." % (n,))
        self.n = n
        self.grid = quadrature.PanelGrid(-quadrature.Z_MAX, quadrature.Z_MAX, panel_width,
                                         panel_order)
        components = _outer_components(lifetime_model.hazard_score_z(self.grid.nodes))
        tables = np.empty((n, 3, self.grid.panels + 1))
        for rank in range(1, n + 1):
            weight = lifetime_model.order_stat_weight_z(self.grid.nodes, rank, n)
            tables[rank - 1] = self.grid.cumulative(
                np.moveaxis(components, -1, 0) * weight[None, :, :])
        self._tables = tables
        _logger.info("Tabulated Fisher information integrals for n=%d.", n)

    def reduced(self, rank: int, z: ArrayLike) -> FloatArray:
        """J(rank, z) for an array of upper limits z, shape z.shape + (3,) in (mm, mt, tt)
        order."""
        OrderStatIndex(rank, self.n)
        z = np.asarray(z, dtype=float)
        flat = z.reshape(-1)
        index, nodes, weights = self.grid.partial_rule(flat)
        base = self._tables[rank - 1][:, index].T
        components = _outer_components(lifetime_model.hazard_score_z(nodes))
        weight = lifetime_model.order_stat_weight_z(nodes, rank, self.n)
        partial = np.sum(components * (weights * weight)[..., None], axis=1)
        return (base + partial).reshape(z.shape + (3,))

    def uhcs_reduced(self, scheme: uhcs.SchemeParams, z1: ArrayLike, z2: ArrayLike) -> FloatArray:
        """The five-term combination in theta-free form, for standardized thresholds z1, z2."""
        uhcs.validate(scheme)
        if scheme.n != self.n:
            raise exceptions.DomainError("Table is for n=%d; scheme has n=%d."
                                         % (self.n, scheme.n))
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        r, l = scheme.r, scheme.l
        full = self._tables[l - 1][:, -1]
        return (full + self.reduced(self.n, z1) + self.reduced(r, z2) - self.reduced(l, z2)
                - self.reduced(r, z1))

    def uhcs_information(self, scheme: uhcs.SchemeParams, mu: ArrayLike, tau: ArrayLike) \
            -> FloatArray:
        """fisher_uhcs for arrays of draws, as an (N, 3) array of (i_mm, i_mt, i_tt)."""
        mu = np.asarray(mu, dtype=float)
        tau = np.asarray(tau, dtype=float)
        root_tau = np.sqrt(tau)
        reduced = self.uhcs_reduced(scheme, root_tau * (math.log(scheme.T1) - mu),
                                    root_tau * (math.log(scheme.T2) - mu))
        s_mu, s_tau = root_tau, 1 / (2 * tau)
        return np.stack([reduced[..., 0] * s_mu * s_mu, reduced[..., 1] * s_mu * s_tau,
                         reduced[..., 2] * s_tau * s_tau], axis=-1)

    def uhcs_log_det(self, scheme: uhcs.SchemeParams, mu: ArrayLike, tau: ArrayLike) -> FloatArray:
        """ln det of fisher_uhcs for arrays of draws. Since det(D J D) = det(J) det(D)^2 and
        det(D) = 1/(2 sqrt(tau)), this is ln det J - ln tau - 2 ln 2."""
        mu = np.asarray(mu, dtype=float)
        tau = np.asarray(tau, dtype=float)
        root_tau = np.sqrt(tau)
        reduced = self.uhcs_reduced(scheme, root_tau * (math.log(scheme.T1) - mu),
                                    root_tau * (math.log(scheme.T2) - mu))
        determinant = reduced[..., 0] * reduced[..., 2] - reduced[..., 1] ** 2
        if np.any(~(determinant > 0)):
            worst = int(np.argmin(determinant))
            raise exceptions.DegenerateDesignError(
                "Fisher information of %s is singular at draw %d (mu=%r, tau=%r)."
                % (scheme, worst, float(mu.reshape(-1)[worst]), float(tau.reshape(-1)[worst])))
        return np.log(determinant) - np.log(tau) - 2 * math.log(2)


@functools.lru_cache(maxsize=64)
def fisher_table(n: int) -> FisherTable:
    """The shared FisherTable for sample size n."""
    return FisherTable(n)


def complete_sample_information(n: int, params: LogNormalParams) -> FisherMatrix:
    """diag(n tau, n / (2 tau^2)), the information in n uncensored lifetimes."""
    return FisherMatrix(n * params.tau, n / (2 * params.tau ** 2), 0.0)


def reduce_matrices(matrices: typing.Iterable[FisherMatrix]) -> FisherMatrix:
    """Sum matrices in iteration order."""
    total = FisherMatrix(0.0, 0.0, 0.0)
    for matrix in matrices:
        total = total + matrix
    return total
