"""
Seedable desk-scale control environments with disturbance injection.

Every environment integrates its physical state with semi-implicit Euler and
works on batches: arrays of shape (B, physical_dim), so many rollouts can
advance in lock-step. Actions are normalized to [-1, 1] and scaled by an
environment gain. Observations encode angles as (cos, sin) so box keys never
see a branch cut.

Push disturbances arrive as an (x, z) force vector at a random angle in the
translation plane; each environment folds it into its own force balance:
  pendulum  - torque perturbation from the z component (magnitude * sin(angle))
  cartpole  - horizontal force on the cart from the x component
  hopper1d  - vertical force on the body from the z component
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import strings
from .errors import ContractViolation, DynamicsBlowupError
from .models import DisturbanceConfig


@dataclass(frozen=True)
class EnvSpec:
    name: str
    obs_dim: int
    action_dim: int
    action_low: Tuple[float, ...]
    action_high: Tuple[float, ...]
    dt: float
    substeps: int
    meshed_coords: Tuple[int, ...]
    nominal_length: int = 1000
    params: Dict[str, float] = field(default_factory=dict, hash=False, compare=False)

    @property
    def state_dim(self) -> int:
        """Topological dimension D_t: size of the meshed state vector."""
        return len(self.meshed_coords)

    @property
    def action_bounds(self) -> np.ndarray:
        return np.array([self.action_low, self.action_high], dtype=np.float64)


@dataclass
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool
    physical_state: np.ndarray
    failed: bool = False


class Dynamics:
    """Batched physics for one environment."""

    physical_dim: int = 0

    def __init__(self, spec: EnvSpec):
        self.spec = spec
        self.p = spec.params
        self.h = spec.dt / spec.substeps

    def sample_initial(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def observe(self, phys: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def advance(self, phys: np.ndarray, action: np.ndarray, push: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def reward(self, phys: np.ndarray, action: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def failed(self, phys: np.ndarray, t: int) -> np.ndarray:
        return np.zeros(len(phys), dtype=bool)

    @staticmethod
    def control_cost(action: np.ndarray) -> np.ndarray:
        return 0.01 * np.sum(action * action, axis=1)


class PendulumDynamics(Dynamics):
    """theta = 0 upright, theta = pi hanging; physical state [theta, theta_dot]."""

    physical_dim = 2

    def sample_initial(self, rng):
        theta = math.pi + rng.uniform(-0.05, 0.05)
        theta_dot = rng.uniform(-0.05, 0.05)
        return np.array([theta, theta_dot])

    def observe(self, phys):
        theta, theta_dot = phys[:, 0], phys[:, 1]
        return np.stack([np.cos(theta), np.sin(theta), theta_dot], axis=1)

    def advance(self, phys, action, push):
        g, length, mass = self.p["gravity"], self.p["length"], self.p["mass"]
        inertia = mass * length * length
        torque = self.p["max_torque"] * action[:, 0] + push[:, 1]
        theta, theta_dot = phys[:, 0].copy(), phys[:, 1].copy()
        for _ in range(self.spec.substeps):
            accel = (g / length) * np.sin(theta) - self.p["damping"] / inertia * theta_dot + torque / inertia
            theta_dot = theta_dot + self.h * accel
            theta = theta + self.h * theta_dot
        return np.stack([theta, theta_dot], axis=1)

    def reward(self, phys, action):
        return 1.01 + np.cos(phys[:, 0]) - self.control_cost(action)

    def energy(self, phys: np.ndarray) -> np.ndarray:
        """Mechanical energy, zero at the hanging rest state."""
        g, length, mass = self.p["gravity"], self.p["length"], self.p["mass"]
        theta, theta_dot = phys[:, 0], phys[:, 1]
        return 0.5 * mass * (length * theta_dot) ** 2 + mass * g * length * (1.0 + np.cos(theta))


class CartpoleSwingupDynamics(Dynamics):
    """theta measured from hanging-down (upright at pi); physical state [x, x_dot, theta, theta_dot]."""

    physical_dim = 4

    def sample_initial(self, rng):
        return rng.uniform(-0.05, 0.05, size=4)

    def observe(self, phys):
        x, x_dot, theta, theta_dot = phys.T
        return np.stack([x, x_dot, np.cos(theta), np.sin(theta), theta_dot], axis=1)

    def advance(self, phys, action, push):
        g = self.p["gravity"]
        m_cart, m_pole, half = self.p["cart_mass"], self.p["pole_mass"], self.p["half_length"]
        total = m_cart + m_pole
        force = self.p["max_force"] * action[:, 0] + push[:, 0]
        x, x_dot, theta, theta_dot = (phys[:, i].copy() for i in range(4))
        for _ in range(self.spec.substeps):
            # angle from upright: sin(theta - pi) = -sin(theta), cos(theta - pi) = -cos(theta)
            sin_up, cos_up = -np.sin(theta), -np.cos(theta)
            temp = (force + m_pole * half * theta_dot * theta_dot * sin_up) / total
            theta_acc = (g * sin_up - cos_up * temp) / (half * (4.0 / 3.0 - m_pole * cos_up * cos_up / total))
            x_acc = temp - m_pole * half * theta_acc * cos_up / total
            x_dot = x_dot + self.h * x_acc
            theta_dot = theta_dot + self.h * theta_acc
            x = x + self.h * x_dot
            theta = theta + self.h * theta_dot
        return np.stack([x, x_dot, theta, theta_dot], axis=1)

    def reward(self, phys, action):
        return 1.0 + 0.5 * (1.0 - np.cos(phys[:, 2])) - self.control_cost(action)

    def failed(self, phys, t):
        off_track = np.abs(phys[:, 0]) > self.p["track_limit"]
        if t < self.p["swingup_grace"]:
            return off_track
        from_upright = np.abs(np.angle(np.exp(1j * (phys[:, 2] - math.pi))))
        return off_track | (from_upright > self.p["upright_limit"])


class Hopper1dDynamics(Dynamics):
    """
    Spring-leg hopper: body mass on a sprung, actuated leg with a light foot.

    Physical state [height, vertical velocity, leg length, leg velocity]; the
    foot sits at height - leg length and cannot go below the ground. The leg
    stroke is bounded by [min_leg, max_leg]; hitting either stop is a plastic
    collision between body and foot that conserves their momentum, and the
    ground only ever removes foot velocity. The only energy source is the
    thrust, doing thrust * (change in leg length) of work per step.
    """

    physical_dim = 4

    @property
    def spring_rest_length(self) -> float:
        return self.p["rest_height"] + self.p["body_mass"] * self.p["gravity"] / self.p["stiffness"]

    def sample_initial(self, rng):
        rest = self.p["rest_height"]
        height = rest * rng.uniform(0.95, 1.05)
        velocity = rng.uniform(-0.01, 0.01)
        # foot starts on the ground
        return np.array([height, velocity, height, velocity])

    def observe(self, phys):
        return phys.copy()

    def advance(self, phys, action, push):
        g, m_body, m_foot = self.p["gravity"], self.p["body_mass"], self.p["foot_mass"]
        k, c = self.p["stiffness"], self.p["damping"]
        min_leg, max_leg = self.p["min_leg"], self.p["max_leg"]
        rest_length = self.spring_rest_length
        total = m_body + m_foot
        h = self.h
        thrust = self.p["max_thrust"] * action[:, 0]
        y, vy, leg, leg_dot = (phys[:, i].copy() for i in range(4))
        foot, foot_v = y - leg, vy - leg_dot
        for _ in range(self.spec.substeps):
            leg_force = k * (rest_length - leg) - c * leg_dot + thrust
            vy = vy + h * (leg_force / m_body - g + push[:, 1] / m_body)
            foot_v = foot_v + h * (-leg_force / m_foot - g)

            # leg stops: keep the centre-of-mass velocity, shrink the closing
            # velocity to what just reaches the stop
            rel = vy - foot_v
            allowed = np.clip(rel, (min_leg - leg) / h, (max_leg - leg) / h)
            hit = allowed != rel
            common = (m_body * vy + m_foot * foot_v) / total
            vy = np.where(hit, common + (m_foot / total) * allowed, vy)
            foot_v = np.where(hit, common - (m_body / total) * allowed, foot_v)

            # ground: the foot stops on contact
            foot_v = np.where(foot + h * foot_v < 0.0, -foot / h, foot_v)
            # a grounded foot holds the leg stops against the body alone
            vy = np.clip(vy, foot_v + (min_leg - leg) / h, foot_v + (max_leg - leg) / h)

            y = y + h * vy
            foot = np.maximum(foot + h * foot_v, 0.0)
            leg, leg_dot = y - foot, vy - foot_v
        return np.stack([y, vy, leg, leg_dot], axis=1)

    def energy(self, phys: np.ndarray) -> np.ndarray:
        """Kinetic, gravitational and spring energy of body and foot; foot on the ground at zero height."""
        g, m_body, m_foot = self.p["gravity"], self.p["body_mass"], self.p["foot_mass"]
        y, vy, leg, leg_dot = phys[:, 0], phys[:, 1], phys[:, 2], phys[:, 3]
        foot, foot_v = y - leg, vy - leg_dot
        spring = 0.5 * self.p["stiffness"] * (self.spring_rest_length - leg) ** 2
        return (
            0.5 * m_body * vy**2 + m_body * g * y
            + 0.5 * m_foot * foot_v**2 + m_foot * g * foot
            + spring
        )

    def reward(self, phys, action):
        clearance = np.maximum(0.0, phys[:, 0] - self.p["rest_height"])
        return 1.0 + 2.0 * clearance - self.control_cost(action)

    def failed(self, phys, t):
        return phys[:, 0] < self.p["fail_height_ratio"] * self.p["rest_height"]


_UNIT_ACTION = ((-1.0,), (1.0,))

ENVIRONMENTS: Dict[str, Dict] = {
    "pendulum": {
        "dynamics": PendulumDynamics,
        "spec": dict(
            obs_dim=3, action_dim=1, dt=0.05, substeps=20, meshed_coords=(0, 1, 2),
            params={"gravity": 9.81, "length": 1.0, "mass": 1.0, "damping": 0.0, "max_torque": 2.0},
        ),
        "description": "Torque-limited pendulum swing-up; never terminates early",
    },
    "cartpole_swingup": {
        "dynamics": CartpoleSwingupDynamics,
        "spec": dict(
            obs_dim=5, action_dim=1, dt=0.05, substeps=5, meshed_coords=(1, 2, 3, 4),
            params={
                "gravity": 9.81, "cart_mass": 1.0, "pole_mass": 0.1, "half_length": 0.5,
                "max_force": 10.0, "track_limit": 2.4, "swingup_grace": 400, "upright_limit": math.pi / 2,
            },
        ),
        "description": "Cart-pole swing-up; fails off-track or when not upright after the grace period",
    },
    "hopper1d": {
        "dynamics": Hopper1dDynamics,
        "spec": dict(
            obs_dim=4, action_dim=1, dt=0.01, substeps=10, meshed_coords=(0, 1, 2, 3),
            params={
                "gravity": 9.81, "body_mass": 1.0, "foot_mass": 0.1, "stiffness": 200.0, "damping": 2.0,
                "rest_height": 1.0, "max_thrust": 200.0, "min_leg": 0.05, "max_leg": 1.3,
                "fail_height_ratio": 0.3,
            },
        ),
        "description": "Vertical spring-leg hopper; fails when the body drops below 30% of rest height",
    },
}


def get_all_environments() -> List[str]:
    return list(ENVIRONMENTS.keys())


def get_env_spec(name: str, **param_overrides: float) -> EnvSpec:
    entry = ENVIRONMENTS.get(name)
    if entry is None:
        raise ContractViolation(strings.ERROR_UNKNOWN_ENV.format(name, get_all_environments()))
    kwargs = dict(entry["spec"])
    kwargs["params"] = {**kwargs["params"], **param_overrides}
    low, high = _UNIT_ACTION
    return EnvSpec(name=name, action_low=low * kwargs["action_dim"], action_high=high * kwargs["action_dim"], **kwargs)


def make_dynamics(spec: EnvSpec) -> Dynamics:
    return ENVIRONMENTS[spec.name]["dynamics"](spec)


def push_vectors(
    disturbance: DisturbanceConfig, uniform: np.ndarray, angle: np.ndarray
) -> np.ndarray:
    """(B, 2) push forces in the (x, z) plane; zero where the rate draw misses."""
    magnitude = np.where(uniform < disturbance.push_rate, disturbance.push_magnitude, 0.0)
    return np.stack([magnitude * np.cos(angle), magnitude * np.sin(angle)], axis=1)


def reset(spec: EnvSpec, seed: int) -> np.ndarray:
    """Physical initial state, deterministic per seed."""
    return make_dynamics(spec).sample_initial(np.random.default_rng(seed))


def observe(spec: EnvSpec, state: np.ndarray) -> np.ndarray:
    return make_dynamics(spec).observe(np.asarray(state, dtype=np.float64).reshape(1, -1))[0]


def step(
    spec: EnvSpec,
    state: np.ndarray,
    action: np.ndarray,
    disturbance: Optional[DisturbanceConfig] = None,
    rng: Optional[np.random.Generator] = None,
    t: int = 0,
) -> StepResult:
    """
    Advance one control step from physical `state` at step index `t`.

    Raises DynamicsBlowupError when integration yields a non-finite state.
    """
    disturbance = disturbance or DisturbanceConfig()
    rng = rng or np.random.default_rng(0)
    dynamics = make_dynamics(spec)
    a = np.asarray(action, dtype=np.float64).reshape(1, -1)
    if a.shape[1] != spec.action_dim:
        raise ContractViolation(strings.ERROR_DIM_MISMATCH.format(expected=spec.action_dim, got=a.shape[1]))
    low, high = spec.action_bounds
    a = np.clip(a, low, high)
    a = np.clip(a + disturbance.action_noise_std * rng.standard_normal(a.shape), low, high)
    push = push_vectors(disturbance, np.array([rng.random()]), np.array([rng.random() * 2.0 * math.pi]))
    with np.errstate(invalid="ignore", over="ignore"):
        nxt = dynamics.advance(np.asarray(state, dtype=np.float64).reshape(1, -1), a, push)
    if not np.all(np.isfinite(nxt)):
        raise DynamicsBlowupError(strings.ERROR_DYNAMICS_BLOWUP)
    obs = dynamics.observe(nxt) + disturbance.obs_noise_std * rng.standard_normal((1, spec.obs_dim))
    failed = bool(dynamics.failed(nxt, t + 1)[0])
    done = failed or t + 1 >= spec.nominal_length
    return StepResult(
        next_state=obs[0], reward=float(dynamics.reward(nxt, a)[0]), done=done, physical_state=nxt[0], failed=failed
    )
