"""
Basic type definitions.
"""

import typing

import numpy as np
import numpy.typing as npt


FloatArray = npt.NDArray[np.float64]

# Anything numpy will broadcast to a float array.
ArrayLike = typing.Union[float, typing.Sequence[float], FloatArray]

# Vector-valued integrands return one array per abscissa.
VectorFunction = typing.Callable[[float], typing.Union[float, FloatArray]]
