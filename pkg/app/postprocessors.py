"""
Reward postprocessing: divide an episodic return by a clipped trajectory dimension.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import strings
from .box_mesh import lower_mesh_dim, mesh_curve, upper_mesh_dim
from .errors import ContractViolation, DimshapeError
from .models import PostprocessorConfig, PostprocessorKind
from .trajectory import RunningStats, Trajectory, post_transient
from .variation import MADOGRAM_ORDER, VARIOGRAM_ORDER, trajectory_variation_dim

MIN_SEGMENT = 3

DimensionFunction = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class ShapedReturn:
    raw_return: float
    dimension_used: float
    shaped: float


def clipped_dimension(
    traj: Trajectory,
    estimator: DimensionFunction,
    Tr: int,
    D_t: int,
    coords: Optional[Sequence[int]] = None,
) -> float:
    """
    clip(estimator(states with t > Tr), 1, D_t / 2).

    Segments shorter than three states (early falls) and estimator failures
    get the maximum penalty D_t / 2.
    """
    if D_t < 2:
        raise ContractViolation(strings.ERROR_BAD_TOPOLOGICAL_DIM.format(D_t))
    ceiling = D_t / 2.0
    segment = post_transient(traj, Tr)
    if coords is not None:
        segment = segment[:, list(coords)]
    if len(segment) < MIN_SEGMENT:
        return ceiling
    try:
        value = float(estimator(segment))
    except DimshapeError:
        return ceiling
    if math.isnan(value):
        return ceiling
    return min(max(value, 1.0), ceiling)


def dimension_estimator(
    config: PostprocessorConfig, stats: Optional[RunningStats] = None
) -> Optional[DimensionFunction]:
    """The raw (unclipped) dimension function for a postprocessor; None for identity."""
    kind = config.kind
    if kind == PostprocessorKind.IDENTITY:
        return None
    if kind in (PostprocessorKind.MADOGRAM, PostprocessorKind.VARIOGRAM):
        p = MADOGRAM_ORDER if kind == PostprocessorKind.MADOGRAM else VARIOGRAM_ORDER
        return lambda states: trajectory_variation_dim(states, p)

    # empty stats normalize as the identity, matching the policy's own snapshot
    if stats is None:
        frozen = None
    elif stats.count > 0:
        frozen = stats.copy()
    else:
        frozen = RunningStats.identity(stats.dim)
    mesh = config.mesh

    def mesh_dimension(states: np.ndarray) -> float:
        curve = mesh_curve(states, f=mesh.f, d0=mesh.d0, stats=frozen)
        if kind == PostprocessorKind.LOWER_MESH:
            return lower_mesh_dim(curve)
        return upper_mesh_dim(curve, window=mesh.upper_window)

    return mesh_dimension


def postprocess_return(
    traj: Trajectory,
    kind: PostprocessorConfig | PostprocessorKind | str,
    stats: Optional[RunningStats],
    D_t: int,
    coords: Optional[Sequence[int]] = None,
) -> ShapedReturn:
    """
    R = (sum of rewards) / D, D = 1 for identity and the clipped dimension otherwise.

    Mesh dimensions normalize with a frozen copy of `stats` restricted to
    `coords` (the meshed coordinates); `stats` must cover the full state.
    """
    if traj.length < 1:
        raise ContractViolation(strings.ERROR_NO_REWARDS)
    config = kind if isinstance(kind, PostprocessorConfig) else PostprocessorConfig(kind=PostprocessorKind(kind))
    raw = traj.raw_return
    if config.kind == PostprocessorKind.IDENTITY:
        return ShapedReturn(raw_return=raw, dimension_used=1.0, shaped=raw)
    mesh_stats = stats.select(coords) if stats is not None and coords is not None else stats
    estimator = dimension_estimator(config, mesh_stats)
    dimension = clipped_dimension(traj, estimator, config.transient, D_t, coords=coords)
    return ShapedReturn(raw_return=raw, dimension_used=dimension, shaped=raw / dimension)
