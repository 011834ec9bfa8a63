"""
Box meshing and the automatic mesh-dimension estimators.

A box mesh quantizes normalized states to integer keys round(s/d) and counts
occupancy in a hash table, so building a mesh is linear in the number of
states. The mesh curve samples mesh size against box size d; the lower,
upper and central mesh dimensions are slopes of -log m against log d.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import strings
from .errors import ContractViolation, DegenerateCurveError, EmptyStateSetError
from .trajectory import RunningStats, normalize

MIN_BOX_SIZE = 1e-9
MAX_BOX_SIZE = 1e9
SATURATION_FRACTION = 0.8
DEFAULT_SCALE_FACTOR = 1.5
DEFAULT_INITIAL_BOX = 1e-2
CENTRAL_FRACTION = 0.6

# keys beyond this magnitude cannot be represented as int64
_KEY_LIMIT = 2.0 ** 62

Key = Tuple[int, ...]


@dataclass
class BoxMesh:
    box_size: float
    cells: Dict[Key, int] = field(default_factory=dict)
    total_points: int = 0

    @property
    def size(self) -> int:
        return len(self.cells)


@dataclass
class MeshCurve:
    """(d, m) entries sorted ascending by d."""

    entries: List[Tuple[float, int]]
    data_size: int

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def d(self) -> np.ndarray:
        return np.array([e[0] for e in self.entries], dtype=np.float64)

    @property
    def m(self) -> np.ndarray:
        return np.array([e[1] for e in self.entries], dtype=np.int64)

    def log_coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """X = log d, Y = -log m (natural log)."""
        return np.log(self.d), -np.log(self.m.astype(np.float64))

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"d": d, "m": m, "log10_d": math.log10(d), "neg_log10_m": -math.log10(m)}
            for d, m in self.entries
        ]


@dataclass
class DimensionEstimate:
    lower: float
    upper: float
    central: Optional[float] = None


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(normalized: np.ndarray, d: float) -> np.ndarray:
    """Integer box keys round(s/d), ties rounded away from zero."""
    scaled = round_half_away(normalized / d)
    np.clip(scaled, -_KEY_LIMIT, _KEY_LIMIT, out=scaled)
    return scaled.astype(np.int64)


def _prepare(S: Sequence | np.ndarray, stats: RunningStats) -> np.ndarray:
    arr = np.asarray(S, dtype=np.float64)
    if arr.size == 0:
        raise EmptyStateSetError(strings.ERROR_EMPTY_STATE_SET)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return normalize(stats, arr)


def _mesh_from_normalized(normalized: np.ndarray, d: float) -> BoxMesh:
    keys = quantize(normalized, d)
    cells = Counter(map(tuple, keys.tolist()))
    return BoxMesh(box_size=d, cells=dict(cells), total_points=len(normalized))


def _mesh_size(normalized: np.ndarray, d: float) -> int:
    keys = quantize(normalized, d)
    return len(set(map(tuple, keys.tolist())))


def create_box_mesh(S: Sequence | np.ndarray, d: float, stats: RunningStats) -> BoxMesh:
    if d <= 0:
        raise ContractViolation(strings.ERROR_BAD_BOX_SIZE.format(d))
    return _mesh_from_normalized(_prepare(S, stats), d)


def mesh_curve(
    S: Sequence | np.ndarray,
    f: float = DEFAULT_SCALE_FACTOR,
    d0: float = DEFAULT_INITIAL_BOX,
    stats: Optional[RunningStats] = None,
) -> MeshCurve:
    """
    Sample mesh size over box sizes d0 * f^k.

    Shrinks d from d0 until the mesh holds 4/5 of the data or d drops below
    MIN_BOX_SIZE, then grows d from d0 until a single box remains or d
    exceeds MAX_BOX_SIZE. Every d is evaluated once.
    """
    if f <= 1:
        raise ContractViolation(strings.ERROR_BAD_SCALE_FACTOR.format(f))
    if d0 <= 0:
        raise ContractViolation(strings.ERROR_BAD_BOX_SIZE.format(d0))
    if stats is None:
        arr = np.asarray(S, dtype=np.float64)
        if arr.size == 0:
            raise EmptyStateSetError(strings.ERROR_EMPTY_STATE_SET)
        stats = RunningStats.from_batch(arr.reshape(len(arr), -1))
    normalized = _prepare(S, stats)
    n = len(normalized)
    target = math.ceil(SATURATION_FRACTION * n)

    m0 = _mesh_size(normalized, d0)
    smaller: List[Tuple[float, int]] = []
    d, m = d0, m0
    while m < target:
        d = d / f
        if d < MIN_BOX_SIZE:
            break
        m = _mesh_size(normalized, d)
        smaller.append((d, m))

    larger: List[Tuple[float, int]] = []
    d, m = d0, m0
    while m != 1:
        d = d * f
        if d > MAX_BOX_SIZE:
            break
        m = _mesh_size(normalized, d)
        larger.append((d, m))

    entries = list(reversed(smaller)) + [(d0, m0)] + larger
    return MeshCurve(entries=entries, data_size=n)


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    return float(np.sum(dx * (y - y.mean())) / np.sum(dx * dx))


def _require_entries(curve: MeshCurve) -> Tuple[np.ndarray, np.ndarray]:
    if len(curve) < 2:
        raise DegenerateCurveError(strings.ERROR_DEGENERATE_CURVE)
    return curve.log_coordinates()


def lower_mesh_dim(curve: MeshCurve) -> float:
    """Least-squares slope over every entry, flat tails included."""
    x, y = _require_entries(curve)
    return _slope(x, y)


def upper_mesh_dim(curve: MeshCurve, window: int = 1) -> float:
    """Greatest local slope; `window` consecutive steps per local fit."""
    x, y = _require_entries(curve)
    if window < 1:
        raise ContractViolation(strings.ERROR_BAD_COUNT.format("window", window))
    span = min(window, len(x) - 1)
    if span == 1:
        return float(np.max(np.diff(y) / np.diff(x)))
    return max(_slope(x[i:i + span + 1], y[i:i + span + 1]) for i in range(len(x) - span))


def central_mesh_dim(curve: MeshCurve, fraction: float = CENTRAL_FRACTION) -> float:
    """Least-squares slope over the middle `fraction` of entries by log d."""
    x, y = _require_entries(curve)
    n = len(x)
    cut = int(math.floor(n * (1.0 - fraction) / 2.0))
    lo, hi = cut, n - cut
    if hi - lo < 2:
        lo, hi = 0, n
    return _slope(x[lo:hi], y[lo:hi])


def mesh_dimensions(curve: MeshCurve, window: int = 1) -> DimensionEstimate:
    return DimensionEstimate(
        lower=lower_mesh_dim(curve),
        upper=upper_mesh_dim(curve, window=window),
        central=central_mesh_dim(curve),
    )
