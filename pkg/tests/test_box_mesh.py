"""
Tests for box meshing, mesh curves and the mesh-dimension estimators.
"""

import math
import time

import numpy as np
import pytest

from app.box_mesh import (
    MIN_BOX_SIZE,
    MeshCurve,
    central_mesh_dim,
    create_box_mesh,
    lower_mesh_dim,
    mesh_curve,
    mesh_dimensions,
    quantize,
    round_half_away,
    upper_mesh_dim,
)
from app.errors import ContractViolation, DegenerateCurveError, EmptyStateSetError
from app.trajectory import RunningStats


def identity(dim):
    return RunningStats.identity(dim)


def test_single_point_key():
    """[0.23, -0.51] at d=0.1 lands in key (2, -5)"""
    mesh = create_box_mesh([[0.23, -0.51]], 0.1, identity(2))
    assert mesh.size == 1
    assert list(mesh.cells) == [(2, -5)]


def test_repeated_point_one_cell():
    """50 copies occupy one cell with count 50"""
    mesh = create_box_mesh(np.tile([[0.7, 1.3]], (50, 1)), 0.37, identity(2))
    assert mesh.size == 1
    assert list(mesh.cells.values()) == [50]
    assert mesh.total_points == 50


def test_two_points_unit_box():
    """0.04 and 0.96 at d=1 fall in keys 0 and 1"""
    mesh = create_box_mesh([[0.04], [0.96]], 1.0, identity(1))
    assert sorted(mesh.cells) == [(0,), (1,)]


def test_evenly_spaced_points():
    """i/99 for i<100 at d=0.1 covers keys 0..10"""
    points = (np.arange(100) / 99.0).reshape(-1, 1)
    assert create_box_mesh(points, 0.1, identity(1)).size == 11


def test_counts_sum_to_total():
    """Occupancy counts add up to the number of inserted states"""
    rng = np.random.default_rng(0)
    points = rng.normal(size=(500, 3))
    mesh = create_box_mesh(points, 0.5, RunningStats.from_batch(points))
    assert sum(mesh.cells.values()) == mesh.total_points == 500


def test_ties_round_away_from_zero():
    """x.5 rounds away from zero in both directions"""
    assert round_half_away(np.array([0.5, -0.5, 1.5, -2.5, 0.49])).tolist() == [1.0, -1.0, 2.0, -3.0, 0.0]
    assert quantize(np.array([[0.25, -0.25]]), 0.5).tolist() == [[1, -1]]


def test_empty_state_set():
    """Meshing nothing is an error"""
    with pytest.raises(EmptyStateSetError, match="empty state set"):
        create_box_mesh(np.zeros((0, 2)), 0.1, identity(2))
    with pytest.raises(EmptyStateSetError):
        mesh_curve(np.zeros((0, 2)))


def test_bad_parameters():
    """d <= 0 and f <= 1 are rejected"""
    with pytest.raises(ContractViolation):
        create_box_mesh([[0.0]], 0.0, identity(1))
    with pytest.raises(ContractViolation):
        mesh_curve([[0.0], [1.0]], f=1.0)


def test_permutation_invariance():
    """Mesh size does not depend on point order"""
    rng = np.random.default_rng(1)
    points = rng.random((1000, 2))
    stats = RunningStats.from_batch(points)
    shuffled = points[rng.permutation(len(points))]
    assert create_box_mesh(points, 0.05, stats).size == create_box_mesh(shuffled, 0.05, stats).size


def test_nested_box_sizes_are_monotone():
    """Tripling d never increases the mesh size (odd multiples nest exactly)"""
    rng = np.random.default_rng(2)
    points = rng.normal(size=(2000, 2))
    stats = RunningStats.from_batch(points)
    d = 0.01
    sizes = []
    for _ in range(6):
        sizes.append(create_box_mesh(points, d, stats).size)
        d *= 3.0
    assert sizes == sorted(sizes, reverse=True)


def test_single_point_curve():
    """One point gives the single entry (d0, 1)"""
    curve = mesh_curve([[0.3, 0.4]], f=1.5, d0=1e-2)
    assert curve.entries == [(1e-2, 1)]
    with pytest.raises(DegenerateCurveError, match="degenerate curve"):
        lower_mesh_dim(curve)
    with pytest.raises(DegenerateCurveError):
        upper_mesh_dim(curve)


def test_curve_is_sorted_and_bounded():
    """Entries ascend in d, distinct, with 1 <= m <= n"""
    rng = np.random.default_rng(3)
    points = rng.random((3000, 2))
    curve = mesh_curve(points)
    d = curve.d
    assert np.all(np.diff(d) > 0)
    assert np.all((curve.m >= 1) & (curve.m <= 3000))
    assert curve.m[-1] == 1
    assert curve.m[0] >= math.ceil(0.8 * 3000)


def test_curve_loops_stop_at_targets():
    """Shrinking stops at the first saturated size, growth at the first single box"""
    points = (np.arange(1000) / 999.0).reshape(-1, 1)
    curve = mesh_curve(points, f=1.5, d0=1e-2, stats=identity(1))
    m = curve.m.tolist()
    assert m[0] >= 800 and all(v < 800 for v in m[1:])
    assert m[-1] == 1 and all(v > 1 for v in m[:-1])


def test_constant_set_curve_is_flat():
    """Identical points: m = 1 at every d down to the floor, slopes 0"""
    curve = mesh_curve(np.ones((500, 3)))
    assert set(curve.m.tolist()) == {1}
    assert curve.d[0] >= MIN_BOX_SIZE
    assert lower_mesh_dim(curve) == 0.0
    assert upper_mesh_dim(curve) == 0.0


def test_line_curve_matches_brute_force():
    """Central entries of a line's curve satisfy m ~ c / d"""
    points = np.linspace(0.0, 1.0, 10_000).reshape(-1, 1)
    stats = identity(1)
    curve = mesh_curve(points, stats=stats)
    for d, m in curve.entries:
        expected = len(set(np.sign(points[:, 0] / d) * np.floor(np.abs(points[:, 0] / d) + 0.5)))
        assert m == expected
    central = [(d, m) for d, m in curve.entries if 1e-3 < d < 1e-1]
    products = [d * m for d, m in central]
    assert max(products) / min(products) < 1.2


def test_exact_power_law_slopes():
    """m = round(1/d) on d = 2^-k gives slope 1 for every estimator"""
    entries = [(2.0 ** -k, round(2.0 ** k)) for k in range(12, -1, -1)]
    curve = MeshCurve(entries=entries, data_size=4096)
    assert lower_mesh_dim(curve) == pytest.approx(1.0, abs=1e-6)
    assert upper_mesh_dim(curve) == pytest.approx(1.0, abs=1e-6)
    assert central_mesh_dim(curve) == pytest.approx(1.0, abs=1e-6)


def test_upper_takes_greatest_pair_slope():
    """{(1,1), (0.5,2), (0.25,8)} has pair slopes 1 and 2"""
    curve = MeshCurve(entries=[(0.25, 8), (0.5, 2), (1.0, 1)], data_size=8)
    assert upper_mesh_dim(curve) == pytest.approx(2.0)
    assert lower_mesh_dim(curve) <= upper_mesh_dim(curve)


def test_upper_window_smooths():
    """Wider windows never exceed the pairwise maximum"""
    rng = np.random.default_rng(4)
    curve = mesh_curve(rng.random((5000, 2)))
    pairwise = upper_mesh_dim(curve, window=1)
    assert upper_mesh_dim(curve, window=3) <= pairwise + 1e-12
    with pytest.raises(ContractViolation):
        upper_mesh_dim(curve, window=0)


def test_lower_never_exceeds_upper():
    """lower <= upper on assorted random sets"""
    rng = np.random.default_rng(5)
    for dim in (1, 2, 3):
        curve = mesh_curve(rng.normal(size=(2000, dim)))
        dims = mesh_dimensions(curve)
        assert dims.lower <= dims.upper
        assert dims.central <= dims.upper + 1e-12


def test_determinism():
    """Same inputs give the same curve"""
    rng = np.random.default_rng(6)
    points = rng.random((2000, 2))
    assert mesh_curve(points).entries == mesh_curve(points).entries


def test_curve_rows_use_base_10():
    """rows() exports d, m and their base-10 logs"""
    curve = MeshCurve(entries=[(0.01, 100), (1.0, 1)], data_size=100)
    first = curve.rows()[0]
    assert first["log10_d"] == pytest.approx(-2.0)
    assert first["neg_log10_m"] == pytest.approx(-2.0)


def _median_build_time(points, stats, runs=5):
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        create_box_mesh(points, 1e-3, stats)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


@pytest.mark.slow
def test_build_time_is_near_linear():
    """Doubling the insertions at most triples the build time"""
    rng = np.random.default_rng(7)
    points = rng.random((200_000, 2))
    stats = RunningStats.from_batch(points)
    small = _median_build_time(points[:100_000], stats)
    large = _median_build_time(points, stats)
    assert large <= 3.0 * small
