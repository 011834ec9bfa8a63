"""
Tests for the built-in environments and batched rollouts.
"""

import dataclasses
import math

import numpy as np
import pytest

from app.environments import (
    Hopper1dDynamics,
    PendulumDynamics,
    get_all_environments,
    get_env_spec,
    make_dynamics,
    reset,
    step,
)
from app.errors import ContractViolation, DynamicsBlowupError
from app.models import DisturbanceConfig
from app.policy import LinearPolicy
from app.rollout import rollout, rollout_batch, rollout_policies
from app.trajectory import RunningStats


def random_policy(spec, seed=0, scale=1.0):
    weights = np.random.default_rng(seed).normal(scale=scale, size=(spec.action_dim, spec.obs_dim))
    return LinearPolicy(weights=weights, obs_stats=RunningStats.identity(spec.obs_dim), env_name=spec.name)


def test_roster():
    """Three environments, translation coordinates held out of the mesh"""
    assert set(get_all_environments()) == {"pendulum", "cartpole_swingup", "hopper1d"}
    assert get_env_spec("pendulum").state_dim == 3
    cartpole = get_env_spec("cartpole_swingup")
    assert 0 not in cartpole.meshed_coords and cartpole.state_dim == 4
    assert get_env_spec("hopper1d").state_dim == 4
    with pytest.raises(ContractViolation):
        get_env_spec("halfcheetah")


def test_reset_is_deterministic(pendulum_spec):
    """Same seed, same initial state"""
    assert reset(pendulum_spec, 7).tolist() == reset(pendulum_spec, 7).tolist()


def test_reset_ranges(pendulum_spec, hopper_spec):
    """Pendulum hangs near pi; hopper stands near rest height"""
    for seed in range(50):
        theta, theta_dot = reset(pendulum_spec, seed)
        assert math.pi - 0.05 <= theta <= math.pi + 0.05
        assert -0.05 <= theta_dot <= 0.05
        y, vy, _, _ = reset(hopper_spec, seed)
        rest = hopper_spec.params["rest_height"]
        assert 0.95 * rest <= y <= 1.05 * rest
        assert abs(vy) <= 0.01


def test_pendulum_rest_is_equilibrium(pendulum_spec):
    """Zero action at rest-down stays within 1e-9"""
    result = step(pendulum_spec, np.array([math.pi, 0.0]), np.zeros(1))
    assert abs(result.physical_state[0] - math.pi) < 1e-9
    assert abs(result.physical_state[1]) < 1e-9
    assert not result.done


def test_pendulum_conserves_energy(pendulum_spec):
    """Unactuated pendulum keeps energy within 1% over 10^4 steps"""
    dynamics = make_dynamics(pendulum_spec)
    assert isinstance(dynamics, PendulumDynamics)
    phys = np.array([[math.pi / 2.0, 0.0]])
    start = dynamics.energy(phys)[0]
    action, push = np.zeros((1, 1)), np.zeros((1, 2))
    worst = 0.0
    for _ in range(10_000):
        phys = dynamics.advance(phys, action, push)
        worst = max(worst, abs(dynamics.energy(phys)[0] - start) / start)
    assert worst < 0.01


def test_step_rejects_bad_action(pendulum_spec):
    """Action dimension must match"""
    with pytest.raises(ContractViolation):
        step(pendulum_spec, reset(pendulum_spec, 0), np.zeros(2))


def test_step_blowup():
    """Non-finite integration raises a dynamics blowup"""
    spec = get_env_spec("pendulum", gravity=math.inf)
    with pytest.raises(DynamicsBlowupError, match="dynamics blowup"):
        step(spec, np.array([math.pi + 0.01, 0.0]), np.zeros(1))


def test_step_done_at_nominal_length(pendulum_spec):
    """done only at the step limit for the never-failing pendulum"""
    state = reset(pendulum_spec, 0)
    assert not step(pendulum_spec, state, np.zeros(1), t=998).done
    assert step(pendulum_spec, state, np.zeros(1), t=999).done


def test_cartpole_failure_predicate():
    """Off-track fails any time; hanging fails only after the grace period"""
    spec = get_env_spec("cartpole_swingup")
    assert step(spec, np.array([3.0, 0.0, math.pi, 0.0]), np.zeros(1), t=0).failed
    assert not step(spec, np.array([0.0, 0.0, 0.0, 0.0]), np.zeros(1), t=10).failed
    assert step(spec, np.array([0.0, 0.0, 0.0, 0.0]), np.zeros(1), t=500).failed
    assert not step(spec, np.array([0.0, 0.0, math.pi, 0.0]), np.zeros(1), t=500).failed


def test_zero_policy_pendulum_runs_full_length(pendulum_spec):
    """Pendulum never terminates early"""
    traj, raw = rollout(pendulum_spec, LinearPolicy.zeros(pendulum_spec), 1000, None, 0)
    assert traj.length == 1000
    assert not traj.terminated_early
    assert raw == traj.raw_return
    assert np.all(traj.actions == 0.0)


def test_always_fall_hopper(hopper_spec, falling_hopper_policy):
    """Full downward thrust collapses the hopper early"""
    traj, _ = rollout(hopper_spec, falling_hopper_policy, 1000, None, 0)
    assert traj.terminated_early
    assert traj.length < 1000
    assert len(traj.states) == traj.length + 1


def test_rollouts_are_bit_reproducible():
    """Same seed and config give identical trajectories"""
    disturbance = DisturbanceConfig(action_noise_std=0.1, obs_noise_std=0.05, push_magnitude=3.0, push_rate=0.3)
    for name in get_all_environments():
        spec = get_env_spec(name)
        policy = random_policy(spec, seed=1)
        a, _ = rollout(spec, policy, 300, disturbance, 11)
        b, _ = rollout(spec, policy, 300, disturbance, 11)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.rewards, b.rewards)


def test_batching_does_not_change_results(hopper_spec):
    """A rollout is the same alone or inside a batch"""
    policies = [random_policy(hopper_spec, seed=s, scale=0.3) for s in range(4)]
    seeds = [5, 6, 7, 8]
    disturbance = DisturbanceConfig(action_noise_std=0.05, push_magnitude=2.0, push_rate=0.2)
    batch = rollout_policies(hopper_spec, policies, 400, disturbance, seeds)
    for policy, seed, traj in zip(policies, seeds, batch):
        alone, _ = rollout(hopper_spec, policy, 400, disturbance, seed)
        assert np.array_equal(alone.states, traj.states)


def test_zero_magnitude_push_is_no_push(hopper_spec):
    """push_rate=1 with magnitude 0 changes nothing"""
    policy = random_policy(hopper_spec, seed=2, scale=0.3)
    pushed, _ = rollout(hopper_spec, policy, 300, DisturbanceConfig(push_rate=1.0), 3)
    clean, _ = rollout(hopper_spec, policy, 300, DisturbanceConfig(), 3)
    assert np.array_equal(pushed.states, clean.states)


def test_observation_noise_is_recorded(pendulum_spec):
    """The trajectory stores the noisy observations the policy saw"""
    policy = LinearPolicy.zeros(pendulum_spec)
    noisy, _ = rollout(pendulum_spec, policy, 50, DisturbanceConfig(obs_noise_std=0.01), 4)
    clean, _ = rollout(pendulum_spec, policy, 50, DisturbanceConfig(), 4)
    assert not np.array_equal(noisy.states, clean.states)
    assert np.max(np.abs(noisy.states - clean.states)) < 0.1


def test_rewards_are_non_negative():
    """Alive bonus keeps every per-step reward >= 0"""
    for name in get_all_environments():
        spec = get_env_spec(name)
        for seed in range(3):
            traj, _ = rollout(spec, random_policy(spec, seed=seed, scale=3.0), 500, None, seed)
            assert np.all(traj.rewards >= 0.0)


def test_lower_threshold_never_adds_failures():
    """Lowering the hopper failure height cannot increase failures on fixed seeds"""
    seeds = list(range(20))
    counts = []
    for ratio in (0.5, 0.3, 0.1):
        spec = get_env_spec("hopper1d", fail_height_ratio=ratio)
        policies = [random_policy(spec, seed=s, scale=1.0) for s in seeds]
        batch = rollout_policies(spec, policies, 500, None, seeds)
        counts.append(sum(t.terminated_early for t in batch))
    assert counts[0] >= counts[1] >= counts[2]


def test_blowup_ends_rollout_as_failure():
    """A non-finite state ends the rollout at the previous step"""
    spec = get_env_spec("pendulum", gravity=math.inf)
    traj, _ = rollout(spec, LinearPolicy.zeros(spec), 100, None, 0)
    assert traj.length == 0
    assert traj.terminated_early


def test_rollout_batch_shape_check(pendulum_spec):
    """Weights must be (K, A, O)"""
    with pytest.raises(ContractViolation):
        rollout_batch(pendulum_spec, np.zeros((2, 1, 3)), LinearPolicy.zeros(pendulum_spec).normalization(), 10, None, [0])


def test_policy_acts_within_bounds(pendulum_spec):
    """Actions are clipped to the action bounds"""
    policy = LinearPolicy(weights=[[50.0, 0.0, 0.0]], obs_stats=RunningStats.identity(3), env_name="pendulum")
    assert policy.act(np.array([1.0, 0.0, 0.0])).tolist() == [1.0]
    assert policy.act(np.array([-1.0, 0.0, 0.0])).tolist() == [-1.0]
    assert LinearPolicy.zeros(pendulum_spec).act(np.array([0.3, -0.2, 5.0])).tolist() == [0.0]


def test_hopper_unactuated_loses_energy(hopper_spec):
    """Without thrust the hopper never gains energy, stops and ground included"""
    dynamics = make_dynamics(hopper_spec)
    assert isinstance(dynamics, Hopper1dDynamics)
    phys = reset(hopper_spec, 0).reshape(1, -1)
    phys[0, 0] += 0.5
    phys[0, 2] += 0.2
    start = dynamics.energy(phys)[0]
    action, push = np.zeros((1, 1)), np.zeros((1, 2))
    for _ in range(2000):
        phys = dynamics.advance(phys, action, push)
        assert dynamics.energy(phys)[0] <= start + 0.1


def test_hopper_energy_bounded_by_thrust_work(hopper_spec):
    """Energy gained under bang-bang thrust never exceeds the work the thrust did"""
    spec = dataclasses.replace(hopper_spec, dt=0.001, substeps=1)
    dynamics = make_dynamics(spec)
    min_leg, max_leg = spec.params["min_leg"], spec.params["max_leg"]
    max_thrust = spec.params["max_thrust"]
    phys = reset(spec, 0).reshape(1, -1)
    start = dynamics.energy(phys)[0]
    push = np.zeros((1, 2))
    work = 0.0
    for _ in range(10_000):
        action = np.array([[1.0 if phys[0, 3] >= 0.0 else -1.0]])
        nxt = dynamics.advance(phys, action, push)
        work += abs(max_thrust * action[0, 0] * (nxt[0, 2] - phys[0, 2]))
        phys = nxt
        assert dynamics.energy(phys)[0] - start <= 1.05 * work + 0.5
        assert min_leg - 1e-9 <= phys[0, 2] <= max_leg + 1e-9


def test_hopper_leg_stop_conserves_momentum(hopper_spec):
    """An airborne leg hitting its stop keeps body plus foot momentum"""
    dynamics = make_dynamics(hopper_spec)
    p = hopper_spec.params
    # airborne, leg closing fast onto the lower stop
    phys = np.array([[5.0, 0.0, 0.06, -3.0]])
    before = p["body_mass"] * phys[0, 1] + p["foot_mass"] * (phys[0, 1] - phys[0, 3])
    after_phys = dynamics.advance(phys, -np.ones((1, 1)), np.zeros((1, 2)))
    y, vy, leg, leg_dot = after_phys[0]
    after = p["body_mass"] * vy + p["foot_mass"] * (vy - leg_dot)
    impulse = (p["body_mass"] + p["foot_mass"]) * p["gravity"] * hopper_spec.dt
    assert after == pytest.approx(before - impulse, abs=1e-9)
    assert p["min_leg"] - 1e-9 <= leg < 0.06
