"""
Rollouts of linear policies, batched over policies.

Each rollout draws its initial state and all of its noise from its own seed
before the first step, so its result is the same whichever batch or worker
simulates it.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import strings
from .environments import EnvSpec, make_dynamics, push_vectors
from .errors import ContractViolation
from .models import DisturbanceConfig
from .policy import LinearPolicy, NormalizationSnapshot
from .trajectory import Trajectory

logger = logging.getLogger(__name__)


@dataclass
class NoiseStream:
    initial: np.ndarray
    action: np.ndarray
    push_uniform: np.ndarray
    push_angle: np.ndarray
    observation: np.ndarray

    @classmethod
    def draw(cls, spec: EnvSpec, seed: int, T: int) -> "NoiseStream":
        rng = np.random.default_rng(seed)
        dynamics = make_dynamics(spec)
        initial = dynamics.sample_initial(rng)
        return cls(
            initial=initial,
            action=rng.standard_normal((T, spec.action_dim)),
            push_uniform=rng.random(T),
            push_angle=rng.random(T) * 2.0 * math.pi,
            observation=rng.standard_normal((T + 1, spec.obs_dim)),
        )


def rollout_batch(
    spec: EnvSpec,
    weights: np.ndarray,
    snapshots: Sequence[NormalizationSnapshot] | NormalizationSnapshot,
    T: int,
    disturbance: Optional[DisturbanceConfig],
    seeds: Sequence[int],
) -> List[Trajectory]:
    """
    Simulate K linear policies (weights of shape (K, A, O)) for up to T steps.

    Rollout k uses seeds[k] and snapshots[k] (or one shared snapshot). A
    rollout stops at the environment's failure predicate or after T steps; a
    non-finite state ends it at the previous step and counts as a failure.
    """
    if T < 1:
        raise ContractViolation(strings.ERROR_BAD_COUNT.format("T", T))
    disturbance = disturbance or DisturbanceConfig()
    W = np.asarray(weights, dtype=np.float64)
    K = len(seeds)
    if W.shape != (K, spec.action_dim, spec.obs_dim):
        raise ContractViolation(
            strings.ERROR_DIM_MISMATCH.format(expected=(K, spec.action_dim, spec.obs_dim), got=W.shape)
        )
    if isinstance(snapshots, NormalizationSnapshot):
        snapshots = [snapshots] * K
    mean = np.stack([s.mean for s in snapshots])
    std = np.stack([s.std for s in snapshots])

    dynamics = make_dynamics(spec)
    streams = [NoiseStream.draw(spec, seed, T) for seed in seeds]
    act_noise = np.stack([s.action for s in streams]) * disturbance.action_noise_std
    obs_noise = np.stack([s.observation for s in streams]) * disturbance.obs_noise_std
    push_u = np.stack([s.push_uniform for s in streams])
    push_angle = np.stack([s.push_angle for s in streams])
    low, high = spec.action_bounds

    phys = np.stack([s.initial for s in streams])
    obs_buf = np.zeros((K, T + 1, spec.obs_dim))
    act_buf = np.zeros((K, T, spec.action_dim))
    rew_buf = np.zeros((K, T))
    lengths = np.full(K, T, dtype=np.int64)
    obs_buf[:, 0] = dynamics.observe(phys) + obs_noise[:, 0]

    active = np.arange(K)
    for t in range(T):
        if len(active) == 0:
            break
        z = (obs_buf[active, t] - mean[active]) / std[active]
        Wa = W[active]
        action = Wa[:, :, 0] * z[:, None, 0]
        for j in range(1, spec.obs_dim):
            action = action + Wa[:, :, j] * z[:, None, j]
        action = np.clip(action, low, high)
        action = np.clip(action + act_noise[active, t], low, high)
        push = push_vectors(disturbance, push_u[active, t], push_angle[active, t])

        with np.errstate(invalid="ignore", over="ignore"):
            nxt = dynamics.advance(phys[active], action, push)
        finite = np.all(np.isfinite(nxt), axis=1)
        if not np.all(finite):
            for k in active[~finite]:
                logger.warning(strings.LOG_BLOWUP, int(k), t)
            lengths[active[~finite]] = t
            active, action, nxt = active[finite], action[finite], nxt[finite]
            if len(active) == 0:
                break

        rew_buf[active, t] = dynamics.reward(nxt, action)
        act_buf[active, t] = action
        obs_buf[active, t + 1] = dynamics.observe(nxt) + obs_noise[active, t + 1]
        phys[active] = nxt

        failed = dynamics.failed(nxt, t + 1)
        if np.any(failed):
            lengths[active[failed]] = t + 1
            active = active[~failed]

    return [
        Trajectory(
            states=obs_buf[k, : lengths[k] + 1].copy(),
            actions=act_buf[k, : lengths[k]].copy(),
            rewards=rew_buf[k, : lengths[k]].copy(),
            nominal_length=T,
        )
        for k in range(K)
    ]


def rollout(
    spec: EnvSpec,
    policy: LinearPolicy,
    T: int,
    disturbance: Optional[DisturbanceConfig] = None,
    seed: int = 0,
) -> Tuple[Trajectory, float]:
    traj = rollout_batch(spec, policy.weights[None], policy.normalization(), T, disturbance, [seed])[0]
    return traj, traj.raw_return


def rollout_policies(
    spec: EnvSpec,
    policies: Sequence[LinearPolicy],
    T: int,
    disturbance: Optional[DisturbanceConfig],
    seeds: Sequence[int],
) -> List[Trajectory]:
    """One rollout per (policy, seed) pair, each with that policy's own normalization."""
    weights = np.stack([p.weights for p in policies])
    return rollout_batch(spec, weights, [p.normalization() for p in policies], T, disturbance, seeds)
