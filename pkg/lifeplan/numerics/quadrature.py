"""
Quadrature.

Two integration paths are provided:

* integrate() is the adaptive Gauss-Kronrod authority. It subdivides until the requested
  tolerance is met and reports failure otherwise. It handles scalar and vector-valued
  integrands; the components of a vector integrand share abscissae and subdivision decisions.

* PanelGrid tabulates cumulative integrals over a fixed grid of Gauss-Legendre panels and
  completes the last, partially covered panel with the same rule. It is vectorized over many
  upper limits at once and is what the design layer uses when it needs the same integral for
  thousands of parameter draws. Its panels are narrow enough that the rule is exact to
  rounding for the smooth integrands used here; tests hold it to the adaptive path.
"""
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import integrate as scipy_integrate

from lifeplan.data_types import exceptions
from lifeplan.data_types.typedefs import ArrayLike, FloatArray, VectorFunction

_logger = logging.getLogger(__name__)


# Integrals over x in (0, inf) are carried out in z = sqrt(tau) (ln x - mu) and truncated to
# |z| <= Z_MAX. The standard normal mass beyond it is below 1e-16.
Z_MAX = 8.5


@dataclasses.dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive path."""
    relative_tolerance: float = 1e-8
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise exceptions.DomainError("relative_tolerance must be positive.")
        if not self.absolute_tolerance > 0:
            raise exceptions.DomainError("absolute_tolerance must be positive.")
        if self.max_subdivisions < 1:
            raise exceptions.DomainError("max_subdivisions must be at least 1.")


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate(f: VectorFunction, lower: float, upper: float,
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> typing.Union[float, FloatArray]:
    """Integrate f over (lower, upper) by adaptive Gauss-Kronrod bisection.

    Raises IntegrandError, carrying the abscissa, if f returns anything non-finite, and
    QuadratureError, carrying the best estimate and its error bound, if the tolerance cannot be
    met within spec.max_subdivisions intervals."""
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise exceptions.DomainError("Integration limits must be finite.")
    if not lower < upper:
        raise exceptions.DomainError("Integration limits must satisfy lower < upper; got %r, %r."
                                     % (lower, upper))

    def checked(x: float):
        value = np.asarray(f(x), dtype=float)
        if not np.all(np.isfinite(value)):
            raise exceptions.IntegrandError(x)
        return value

    estimate, error, info = scipy_integrate.quad_vec(
        checked, lower, upper,
        epsabs=spec.absolute_tolerance,
        epsrel=spec.relative_tolerance,
        limit=spec.max_subdivisions,
        norm='max',
        quadrature='gk21',
        full_output=True,
    )
    # Status 2: the error estimate fell below the rounding floor; the estimate is kept.
    if info.status == 2:
        _logger.debug("Quadrature over (%r, %r) limited by rounding error %r.", lower, upper, error)
    elif not info.success:
        raise exceptions.QuadratureError(
            "Quadrature over (%r, %r) did not converge: %s" % (lower, upper, info.message),
            estimate, error)
    if np.ndim(estimate) == 0:
        return float(estimate)
    return np.asarray(estimate)


class PanelGrid:
    """A fixed partition of [lower, upper] into equal panels, each carrying an order-point
    Gauss-Legendre rule.

    Integrand values are supplied at self.nodes (shape (panels, order)), possibly with leading
    batch dimensions. cumulative() turns them into integrals from lower to every panel edge, and
    partial_rule() gives the nodes and weights needed to extend an edge value to an arbitrary
    point inside the following panel."""

    def __init__(self, lower: float, upper: float, width: float = 1 / 16, order: int = 8):
        assert upper > lower and width > 0 and order >= 1
        self.panels = int(math.ceil((upper - lower) / width - 1e-9))
        self.lower = lower
        self.width = width
        self.upper = lower + self.panels * width
        self.order = order
        self.edges = lower + width * np.arange(self.panels + 1)
        abscissae, weights = np.polynomial.legendre.leggauss(order)
        self._unit_nodes = 0.5 * (abscissae + 1)
        self._unit_weights = 0.5 * weights
        self.nodes = self.edges[:-1, None] + width * self._unit_nodes[None, :]
        self.weights = np.broadcast_to(width * self._unit_weights, self.nodes.shape)

    def __repr__(self) -> str:
        return '%s(%r, %r, width=%r, order=%r)' % (type(self).__name__, self.lower, self.upper,
                                                   self.width, self.order)

    def cumulative(self, values: FloatArray) -> FloatArray:
        """Given integrand values at the nodes, with shape (..., panels, order), return the
        integral from lower to each edge, with shape (..., panels + 1)."""
        panel_sums = np.sum(values * self.weights, axis=-1)
        result = np.zeros(panel_sums.shape[:-1] + (self.panels + 1,))
        np.cumsum(panel_sums, axis=-1, out=result[..., 1:])
        return result

    def clip(self, points: ArrayLike) -> FloatArray:
        """Clip points into the tabulated range."""
        return np.clip(np.asarray(points, dtype=float), self.lower, self.upper)

    def partial_rule(self, points: ArrayLike) \
            -> typing.Tuple[np.ndarray, FloatArray, FloatArray]:
        """For each point (after clipping), return the index of the panel edge just below it, the
        nodes of the Gauss-Legendre rule over [edge, point] (shape points.shape + (order,)), and
        the matching weights."""
        points = self.clip(points)
        index = np.floor((points - self.lower) / self.width).astype(int)
        np.clip(index, 0, self.panels, out=index)
        left = self.edges[index]
        span = points - left
        nodes = left[..., None] + span[..., None] * self._unit_nodes
        weights = span[..., None] * self._unit_weights
        return index, nodes, weights


def take_edges(table: FloatArray, index: np.ndarray) -> FloatArray:
    """Select per-row edge values from a cumulative table. table has shape (rows, edges) or
    (edges,); index has shape (rows,)."""
    if table.ndim == 1:
        return table[index]
    return np.take_along_axis(table, index[:, None], axis=-1)[:, 0]
