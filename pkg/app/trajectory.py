"""
Trajectory representation and streaming normalization statistics.

States are stored raw; normalization is applied on demand from a
RunningStats object so meshes can be rebuilt later with frozen stats.
"""

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import strings
from .errors import ContractViolation, NoStatisticsError

STD_FLOOR = 1e-8


def _as_vector(s: Sequence[float] | np.ndarray) -> np.ndarray:
    return np.asarray(s, dtype=np.float64).reshape(-1)


@dataclass
class Trajectory:
    """One rollout: states[0..L], actions[0..L-1], rewards[0..L-1]."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    nominal_length: int

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64).reshape(-1)
        self.actions = np.asarray(self.actions, dtype=np.float64)
        if self.states.ndim == 1:
            self.states = self.states.reshape(-1, 1)
        if self.actions.ndim == 1:
            self.actions = self.actions.reshape(len(self.rewards), -1)
        if len(self.states) != len(self.rewards) + 1 or len(self.actions) != len(self.rewards):
            raise ContractViolation(
                strings.ERROR_DIM_MISMATCH.format(expected=len(self.rewards) + 1, got=len(self.states))
            )

    @property
    def length(self) -> int:
        return len(self.rewards)

    @property
    def terminated_early(self) -> bool:
        return self.length < self.nominal_length

    @property
    def raw_return(self) -> float:
        return float(np.sum(self.rewards))

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]


@dataclass
class RunningStats:
    """Streaming per-coordinate mean and summed squared deviations (Welford / Chan)."""

    dim: int
    count: int = 0
    mean: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.dim <= 0:
            raise ContractViolation(strings.ERROR_BAD_COUNT.format("dim", self.dim))
        self.mean = np.zeros(self.dim) if self.mean is None else _as_vector(self.mean).copy()
        self.m2 = np.zeros(self.dim) if self.m2 is None else _as_vector(self.m2).copy()
        if self.mean.size != self.dim or self.m2.size != self.dim:
            raise ContractViolation(strings.ERROR_DIM_MISMATCH.format(expected=self.dim, got=self.mean.size))

    @classmethod
    def identity(cls, dim: int) -> "RunningStats":
        """Stats whose normalization is the identity map (mean 0, std 1)."""
        return cls(dim=dim, count=1, mean=np.zeros(dim), m2=np.ones(dim))

    @classmethod
    def from_batch(cls, samples: np.ndarray) -> "RunningStats":
        arr = np.asarray(samples, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        stats = cls(dim=arr.shape[1])
        if len(arr) == 0:
            return stats
        stats.count = len(arr)
        stats.mean = arr.mean(axis=0)
        stats.m2 = np.sum((arr - stats.mean) ** 2, axis=0)
        return stats

    def copy(self) -> "RunningStats":
        return RunningStats(dim=self.dim, count=self.count, mean=self.mean, m2=self.m2)

    def push(self, s: Sequence[float] | np.ndarray) -> None:
        x = _as_vector(s)
        if x.size != self.dim:
            raise ContractViolation(strings.ERROR_DIM_MISMATCH.format(expected=self.dim, got=x.size))
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def merged(self, other: "RunningStats") -> "RunningStats":
        if other.dim != self.dim:
            raise ContractViolation(strings.ERROR_DIM_MISMATCH.format(expected=self.dim, got=other.dim))
        if other.count == 0:
            return self.copy()
        if self.count == 0:
            return other.copy()
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = (self.count * self.mean + other.count * other.mean) / n
        m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        return RunningStats(dim=self.dim, count=n, mean=mean, m2=m2)

    def select(self, coords: Sequence[int]) -> "RunningStats":
        idx = list(coords)
        return RunningStats(dim=len(idx), count=self.count, mean=self.mean[idx], m2=self.m2[idx])

    @property
    def variance(self) -> np.ndarray:
        """Sample variance (n-1 denominator), zero below two samples."""
        if self.count < 2:
            return np.zeros(self.dim)
        return np.maximum(self.m2 / (self.count - 1), 0.0)

    @property
    def population_variance(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros(self.dim)
        return np.maximum(self.m2 / self.count, 0.0)

    @property
    def std(self) -> np.ndarray:
        """Std used for normalization: population std floored at STD_FLOOR."""
        return np.maximum(np.sqrt(self.population_variance), STD_FLOOR)


def update_stats(stats: RunningStats, s: Sequence[float] | np.ndarray) -> RunningStats:
    updated = stats.copy()
    updated.push(s)
    return updated


def merge_stats(a: RunningStats, b: RunningStats) -> RunningStats:
    return a.merged(b)


def merge_all(parts: Iterable[RunningStats], dim: Optional[int] = None) -> RunningStats:
    """Fold stats in iteration order."""
    total = None
    for part in parts:
        total = part.copy() if total is None else total.merged(part)
    if total is None:
        return RunningStats(dim=dim or 1)
    return total


def normalize(stats: RunningStats, s: Sequence[float] | np.ndarray) -> np.ndarray:
    """(s - mean) / max(std, eps), element-wise; accepts a single state or a (n, D) array."""
    if stats.count == 0:
        raise NoStatisticsError(strings.ERROR_NO_STATISTICS)
    x = np.asarray(s, dtype=np.float64)
    if x.shape[-1] != stats.dim:
        raise ContractViolation(strings.ERROR_DIM_MISMATCH.format(expected=stats.dim, got=x.shape[-1]))
    return (x - stats.mean) / stats.std


def post_transient(traj: Trajectory, Tr: int) -> np.ndarray:
    """States with index t > Tr; empty (0, D) when the trajectory is not longer than Tr."""
    if Tr < 0:
        raise ContractViolation(strings.ERROR_BAD_TRANSIENT.format(Tr))
    return traj.states[Tr + 1:]
