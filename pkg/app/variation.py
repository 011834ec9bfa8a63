"""
Power-variation estimators of fractional dimension for time series.

p = 1 gives the madogram, p = 2 the variogram.
"""

import math
from typing import Sequence

import numpy as np

from . import strings
from .errors import ContractViolation

MADOGRAM_ORDER = 1.0
VARIOGRAM_ORDER = 2.0
FLAT_SERIES_DIMENSION = 1.0


def _series(X: Sequence[float] | np.ndarray) -> np.ndarray:
    x = np.asarray(X, dtype=np.float64).reshape(-1)
    if len(x) < 3:
        raise ContractViolation(strings.ERROR_SHORT_SERIES.format(len(x)))
    return x


def power_variation(X: Sequence[float] | np.ndarray, p: float, l: int) -> float:
    """P_p(X, l) = 1/(2n - l) * sum_{i=l}^{n} |X_i - X_{i-l}|^p for X_0..X_n."""
    if p <= 0:
        raise ContractViolation(strings.ERROR_BAD_ORDER.format(p))
    if l not in (1, 2):
        raise ContractViolation(strings.ERROR_BAD_LAG.format(l))
    x = _series(X)
    n = len(x) - 1
    increments = np.abs(x[l:] - x[:-l]) ** p
    return float(np.sum(increments) / (2 * n - l))


def variation_estimator(X: Sequence[float] | np.ndarray, p: float) -> float:
    """Dv_p = 2 - (log P_p(X,2) - log P_p(X,1)) / (p log 2); a flat series scores 1."""
    p1 = power_variation(X, p, 1)
    if p1 == 0.0:
        return FLAT_SERIES_DIMENSION
    p2 = power_variation(X, p, 2)
    if p2 == 0.0:
        # period-2 oscillation: lag-2 increments vanish
        return math.inf
    return 2.0 - (math.log(p2) - math.log(p1)) / (p * math.log(2.0))


def trajectory_variation_dim(traj_states: Sequence | np.ndarray, p: float) -> float:
    """Mean over coordinates of the per-coordinate variation estimator."""
    states = np.asarray(traj_states, dtype=np.float64)
    if states.ndim == 1:
        states = states.reshape(-1, 1)
    if len(states) < 3:
        raise ContractViolation(strings.ERROR_SHORT_TRAJECTORY.format(len(states)))
    return float(np.mean([variation_estimator(states[:, j], p) for j in range(states.shape[1])]))


def madogram(traj_states: Sequence | np.ndarray) -> float:
    return trajectory_variation_dim(traj_states, MADOGRAM_ORDER)


def variogram(traj_states: Sequence | np.ndarray) -> float:
    return trajectory_variation_dim(traj_states, VARIOGRAM_ORDER)
