"""
Tests for the reference point sets and the mesh estimators on them.
"""

import math

import numpy as np
import pytest

from app.box_mesh import central_mesh_dim, lower_mesh_dim, mesh_curve, upper_mesh_dim
from app.errors import ContractViolation
from app.fractals import EXPECTED_DIMENSION, SIERPINSKI_VERTICES, FractalSpec, generate, get_all_fractals


def central_fit(kind, **kwargs):
    points = generate(FractalSpec(kind=kind, **kwargs))
    curve = mesh_curve(points, f=1.5)
    return curve, central_mesh_dim(curve)


def test_expected_dimensions():
    """Self-similar sets carry their similarity dimension"""
    assert EXPECTED_DIMENSION["sierpinski"] == pytest.approx(1.585, abs=1e-3)
    assert EXPECTED_DIMENSION["koch"] == pytest.approx(1.2619, abs=1e-4)
    assert set(get_all_fractals()) == {"line", "circle", "square_uniform", "sierpinski", "koch", "lorenz"}


def test_unknown_kind():
    """Unknown kinds and empty sets are rejected"""
    with pytest.raises(ContractViolation):
        generate(FractalSpec(kind="mandelbrot"))
    with pytest.raises(ContractViolation):
        generate(FractalSpec(kind="line", n_points=0))


def test_shapes():
    """Point counts and ambient dimensions"""
    assert generate(FractalSpec(kind="line", n_points=50)).shape == (50, 2)
    assert generate(FractalSpec(kind="circle", n_points=64)).shape == (64, 2)
    assert generate(FractalSpec(kind="koch", level=3)).shape == (4**3 + 1, 2)
    assert generate(FractalSpec(kind="lorenz", n_points=20, burn_in=10, sample_every=2)).shape == (20, 3)


def test_circle_on_unit_circle():
    """Every circle point has radius 1"""
    points = generate(FractalSpec(kind="circle", n_points=1000))
    np.testing.assert_allclose(np.hypot(points[:, 0], points[:, 1]), 1.0, atol=1e-12)


def test_koch_endpoints():
    """The Koch curve runs from (0, 0) to (1, 0)"""
    points = generate(FractalSpec(kind="koch", level=4))
    assert points[0].tolist() == [0.0, 0.0]
    np.testing.assert_allclose(points[-1], [1.0, 0.0])


def test_sierpinski_inside_triangle():
    """Barycentric coordinates of every chaos-game point are >= -1e-12"""
    points = generate(FractalSpec(kind="sierpinski", n_points=20_000, seed=3))
    a, b, c = SIERPINSKI_VERTICES
    basis = np.column_stack([b - a, c - a])
    coords = np.linalg.solve(basis, (points - a).T).T
    barycentric = np.column_stack([1.0 - coords.sum(axis=1), coords])
    assert barycentric.min() >= -1e-12


def test_generators_are_deterministic():
    """Same seed, same points"""
    for kind in ("square_uniform", "sierpinski"):
        a = generate(FractalSpec(kind=kind, n_points=500, seed=9))
        b = generate(FractalSpec(kind=kind, n_points=500, seed=9))
        assert np.array_equal(a, b)
    assert not np.array_equal(
        generate(FractalSpec(kind="sierpinski", n_points=500, seed=1)),
        generate(FractalSpec(kind="sierpinski", n_points=500, seed=2)),
    )


def test_line_central_fit():
    """10^4 points on a segment fit to 1 within 0.1"""
    curve, central = central_fit("line", n_points=10_000)
    assert 0.9 <= central <= 1.1
    assert central <= upper_mesh_dim(curve) + 0.05


@pytest.mark.slow
def test_square_central_fit():
    """10^5 uniform points fit to [1.8, 2.1]"""
    _, central = central_fit("square_uniform", n_points=100_000, seed=0)
    assert 1.8 <= central <= 2.1


@pytest.mark.slow
def test_sierpinski_is_bracketed():
    """2*10^5 chaos-game points: central in [1.45, 1.72], lower <= log3/log2 <= upper"""
    curve, central = central_fit("sierpinski", n_points=200_000, seed=1)
    assert 1.45 <= central <= 1.72
    assert lower_mesh_dim(curve) <= math.log(3.0) / math.log(2.0) <= upper_mesh_dim(curve)
    assert lower_mesh_dim(curve) <= central <= upper_mesh_dim(curve) + 0.05


@pytest.mark.slow
def test_koch_central_fit():
    """Level-7 Koch vertices fit to [1.12, 1.40]"""
    _, central = central_fit("koch", level=7)
    assert 1.12 <= central <= 1.40


@pytest.mark.slow
def test_lorenz_central_fit():
    """10^5 attractor samples fit to [1.85, 2.25]"""
    _, central = central_fit("lorenz", n_points=100_000, seed=0)
    assert 1.85 <= central <= 2.25
