"""
Shared fixtures for the dimshape test suite.
"""

import numpy as np
import pytest

from app.environments import get_env_spec
from app.models import ArsConfig
from app.policy import LinearPolicy
from app.trajectory import RunningStats, Trajectory


def fbm_path(n: int, hurst: float, seed: int = 0) -> np.ndarray:
    """Fractional Brownian motion X_0..X_n by circulant embedding of fractional Gaussian noise."""
    k = np.arange(n + 1, dtype=np.float64)
    two_h = 2.0 * hurst
    gamma = 0.5 * (np.abs(k + 1) ** two_h - 2.0 * np.abs(k) ** two_h + np.abs(k - 1) ** two_h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = np.clip(np.fft.fft(row).real, 0.0, None)
    size = len(row)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    increments = np.fft.fft(np.sqrt(eigenvalues / size) * noise)[:n].real
    return np.concatenate([[0.0], np.cumsum(increments)])


def make_trajectory(states, rewards=None, nominal_length=None) -> Trajectory:
    states = np.asarray(states, dtype=np.float64)
    if states.ndim == 1:
        states = states.reshape(-1, 1)
    length = len(states) - 1
    rewards = np.ones(length) if rewards is None else np.asarray(rewards, dtype=np.float64)
    return Trajectory(
        states=states,
        actions=np.zeros((length, 1)),
        rewards=rewards,
        nominal_length=nominal_length if nominal_length is not None else length,
    )


@pytest.fixture
def fbm():
    return fbm_path


@pytest.fixture
def small_ars() -> ArsConfig:
    """Cheap ARS settings for unit-level training runs."""
    return ArsConfig(n_directions=4, top_directions=2, epochs=3, rollout_length=60, eval_interval=0, checkpoint_interval=0)


@pytest.fixture
def pendulum_spec():
    return get_env_spec("pendulum")


@pytest.fixture
def hopper_spec():
    return get_env_spec("hopper1d")


@pytest.fixture
def falling_hopper_policy(hopper_spec) -> LinearPolicy:
    """Pushes the leg fully down every step; the body collapses below the failure height."""
    weights = np.zeros((hopper_spec.action_dim, hopper_spec.obs_dim))
    weights[0, 0] = -100.0
    return LinearPolicy(weights=weights, obs_stats=RunningStats.identity(hopper_spec.obs_dim), env_name="hopper1d")
