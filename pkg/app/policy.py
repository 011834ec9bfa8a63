"""
Static linear policies with observation normalization.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import strings
from .environments import EnvSpec, get_env_spec
from .errors import ContractViolation
from .trajectory import RunningStats


@dataclass(frozen=True)
class NormalizationSnapshot:
    """Frozen mean/std used to normalize observations during a batch of rollouts."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def of(cls, stats: RunningStats) -> "NormalizationSnapshot":
        # empty stats normalize as the identity until the first update
        if stats.count == 0:
            return cls(mean=np.zeros(stats.dim), std=np.ones(stats.dim))
        return cls(mean=stats.mean.copy(), std=stats.std.copy())


@dataclass
class LinearPolicy:
    """action = clip(M @ normalize(obs_stats, s), action_bounds)."""

    weights: np.ndarray
    obs_stats: RunningStats
    env_name: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[1] != self.obs_stats.dim:
            raise ContractViolation(
                strings.ERROR_DIM_MISMATCH.format(expected=self.obs_stats.dim, got=self.weights.shape)
            )

    @classmethod
    def zeros(cls, spec: EnvSpec) -> "LinearPolicy":
        return cls(
            weights=np.zeros((spec.action_dim, spec.obs_dim)),
            obs_stats=RunningStats(dim=spec.obs_dim),
            env_name=spec.name,
        )

    @property
    def spec(self) -> EnvSpec:
        return get_env_spec(self.env_name)

    def normalization(self) -> NormalizationSnapshot:
        return NormalizationSnapshot.of(self.obs_stats)

    def act(self, obs: np.ndarray, snapshot: Optional[NormalizationSnapshot] = None) -> np.ndarray:
        snapshot = snapshot or self.normalization()
        z = (np.asarray(obs, dtype=np.float64) - snapshot.mean) / snapshot.std
        low, high = self.spec.action_bounds
        return np.clip(self.weights @ z, low, high)

    def copy(self) -> "LinearPolicy":
        return LinearPolicy(weights=self.weights.copy(), obs_stats=self.obs_stats.copy(), env_name=self.env_name)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.weights)))
