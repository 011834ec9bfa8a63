"""
Point sets with known box-counting dimension, used as estimator ground truth.
"""

import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from . import strings
from .errors import ContractViolation

SIERPINSKI_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
CHAOS_GAME_DISCARD = 100
LORENZ_BURN_IN = 1000

EXPECTED_DIMENSION: Dict[str, float] = {
    "line": 1.0,
    "circle": 1.0,
    "square_uniform": 2.0,
    "sierpinski": math.log(3.0) / math.log(2.0),
    "koch": math.log(4.0) / math.log(3.0),
    "lorenz": 2.06,
}


@dataclass(frozen=True)
class FractalSpec:
    kind: str
    n_points: int = 10_000
    seed: int = 0
    level: int = 7
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01
    burn_in: int = LORENZ_BURN_IN
    sample_every: int = 10


def get_all_fractals() -> List[str]:
    return list(EXPECTED_DIMENSION.keys())


def _line(spec: FractalSpec) -> np.ndarray:
    t = np.linspace(0.0, 1.0, spec.n_points)
    direction = np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)])
    return t[:, None] * direction


def _circle(spec: FractalSpec) -> np.ndarray:
    angle = np.linspace(0.0, 2.0 * math.pi, spec.n_points, endpoint=False)
    return np.stack([np.cos(angle), np.sin(angle)], axis=1)


def _square(spec: FractalSpec) -> np.ndarray:
    return np.random.default_rng(spec.seed).random((spec.n_points, 2))


def _sierpinski(spec: FractalSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    choices = rng.integers(0, 3, size=spec.n_points + CHAOS_GAME_DISCARD)
    vx, vy = SIERPINSKI_VERTICES[:, 0].tolist(), SIERPINSKI_VERTICES[:, 1].tolist()
    x, y = SIERPINSKI_VERTICES.mean(axis=0).tolist()
    points = np.empty((spec.n_points, 2))
    for i, j in enumerate(choices.tolist()):
        x = 0.5 * (x + vx[j])
        y = 0.5 * (y + vy[j])
        if i >= CHAOS_GAME_DISCARD:
            points[i - CHAOS_GAME_DISCARD] = (x, y)
    return points


def _koch(spec: FractalSpec) -> np.ndarray:
    """Vertices of the level-k Koch curve on the unit segment (4^k + 1 points)."""
    points = np.array([[0.0, 0.0], [1.0, 0.0]])
    rotation = np.array([[0.5, -math.sqrt(3.0) / 2.0], [math.sqrt(3.0) / 2.0, 0.5]])
    for _ in range(spec.level):
        start, end = points[:-1], points[1:]
        step = (end - start) / 3.0
        a = start + step
        b = start + 2.0 * step
        peak = a + step @ rotation.T
        refined = np.stack([start, a, peak, b], axis=1).reshape(-1, 2)
        points = np.vstack([refined, points[-1:]])
    return points


def _lorenz(spec: FractalSpec) -> np.ndarray:
    sigma, rho, beta, h = spec.sigma, spec.rho, spec.beta, spec.dt

    def deriv(x, y, z):
        return sigma * (y - x), x * (rho - z) - y, x * y - beta * z

    rng = np.random.default_rng(spec.seed)
    x, y, z = (1.0 + 0.01 * rng.standard_normal(3)).tolist()
    points = np.empty((spec.n_points, 3))
    total = spec.burn_in + spec.n_points * spec.sample_every
    for i in range(total):
        k1 = deriv(x, y, z)
        k2 = deriv(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], z + 0.5 * h * k1[2])
        k3 = deriv(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], z + 0.5 * h * k2[2])
        k4 = deriv(x + h * k3[0], y + h * k3[1], z + h * k3[2])
        x += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z += h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        j = i - spec.burn_in
        if j >= 0 and (j + 1) % spec.sample_every == 0:
            points[j // spec.sample_every] = (x, y, z)
    return points


_GENERATORS = {
    "line": _line,
    "circle": _circle,
    "square_uniform": _square,
    "sierpinski": _sierpinski,
    "koch": _koch,
    "lorenz": _lorenz,
}


def generate(spec: FractalSpec) -> np.ndarray:
    if spec.kind not in _GENERATORS:
        raise ContractViolation(strings.ERROR_UNKNOWN_FRACTAL.format(spec.kind, get_all_fractals()))
    if spec.n_points < 1:
        raise ContractViolation(strings.ERROR_BAD_COUNT.format("n_points", spec.n_points))
    return _GENERATORS[spec.kind](spec)
