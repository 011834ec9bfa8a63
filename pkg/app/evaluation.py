"""
Post-training measurement: dimension reports on extended episodes, failure
rates under disturbances, and failure-rate calibration by grid search.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from . import strings
from .box_mesh import central_mesh_dim, lower_mesh_dim, mesh_curve, upper_mesh_dim
from .environments import EnvSpec, get_env_spec
from .errors import ContractViolation
from .models import DisturbanceConfig, MeshConfig
from .parallel import ordered_map, split_even
from .policy import LinearPolicy
from .rollout import rollout_policies
from .trajectory import RunningStats, Trajectory, post_transient
from .variation import madogram, variogram
from utils.seeding import derive_seeds

logger = logging.getLogger(__name__)

DIMENSION_COLUMNS = ["lower_mesh", "upper_mesh", "central_mesh", "madogram", "variogram"]
REPORT_COLUMNS = ["seed_index", "rollout_index", "seed", "length", "terminated_early", "raw_return"] + DIMENSION_COLUMNS
DEFAULT_TRANSIENT = 200
EXTENDED_LENGTH = 10_000
NOMINAL_LENGTH = 1000
DISTURBANCE_KINDS = ("action", "obs", "push")
NORMALIZATIONS = ("policy", "rollout")


def _resolve(env: EnvSpec | str) -> EnvSpec:
    return env if isinstance(env, EnvSpec) else get_env_spec(env)


def measure_trajectory(
    traj: Trajectory,
    spec: EnvSpec,
    stats: Optional[RunningStats],
    Tr: int = DEFAULT_TRANSIENT,
    mesh: MeshConfig = MeshConfig(),
) -> Dict[str, float]:
    """
    Unclipped dimensions of the post-transient meshed states.

    `stats` covers the full observation; None refits stats on the segment
    itself and empty stats normalize as the identity. Values that cannot be
    computed are NaN.
    """
    row = {name: math.nan for name in DIMENSION_COLUMNS}
    segment = post_transient(traj, Tr)[:, list(spec.meshed_coords)]
    if len(segment) < 3:
        return row
    if stats is None:
        mesh_stats = RunningStats.from_batch(segment)
    elif stats.count > 0:
        mesh_stats = stats.select(spec.meshed_coords)
    else:
        mesh_stats = RunningStats.identity(len(spec.meshed_coords))
    curve = mesh_curve(segment, f=mesh.f, d0=mesh.d0, stats=mesh_stats)
    if len(curve) >= 2:
        row["lower_mesh"] = lower_mesh_dim(curve)
        row["upper_mesh"] = upper_mesh_dim(curve, window=mesh.upper_window)
        row["central_mesh"] = central_mesh_dim(curve)
    row["madogram"] = madogram(segment)
    row["variogram"] = variogram(segment)
    return row


@dataclass
class DimensionReport:
    """Per-rollout dimension rows plus mean/std across seeds of per-seed means."""

    env: str
    T: int
    disturbance: DisturbanceConfig
    normalization: str
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS)

    def per_seed(self) -> pd.DataFrame:
        metrics = ["raw_return", "length"] + DIMENSION_COLUMNS
        return self.frame().groupby("seed_index", sort=True)[metrics].mean()

    def aggregates(self) -> Dict[str, Tuple[float, float]]:
        per_seed = self.per_seed()
        return {
            column: (float(per_seed[column].mean()), float(per_seed[column].std(ddof=0)))
            for column in per_seed.columns
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "env": self.env,
            "T": self.T,
            "disturbance": self.disturbance.model_dump(),
            "normalization": self.normalization,
            "rows": self.rows,
            "aggregates": {k: {"mean": m, "std": s} for k, (m, s) in self.aggregates().items()},
        }


@dataclass
class RobustnessReport:
    disturbance: DisturbanceConfig
    n_rollouts: int
    failure_count: int

    @property
    def failure_rate(self) -> float:
        return self.failure_count / self.n_rollouts

    def to_row(self) -> Dict[str, Any]:
        return {
            **self.disturbance.model_dump(),
            "n_rollouts": self.n_rollouts,
            "failure_count": self.failure_count,
            "failure_rate": self.failure_rate,
        }


def _measure_job(job: Tuple) -> List[Dict[str, float]]:
    spec, policies, T, disturbance, seeds, Tr, mesh, refit = job
    trajectories = rollout_policies(spec, policies, T, disturbance, seeds)
    measured = []
    for policy, traj in zip(policies, trajectories):
        row = measure_trajectory(traj, spec, None if refit else policy.obs_stats, Tr, mesh)
        row.update(length=traj.length, terminated_early=traj.terminated_early, raw_return=traj.raw_return)
        measured.append(row)
    return measured


def evaluate_dimensions(
    policy: LinearPolicy | Sequence[LinearPolicy],
    env: EnvSpec | str,
    n_seeds: int = 1,
    rollouts_per_seed: int = 5,
    T_ext: int = EXTENDED_LENGTH,
    disturbance: Optional[DisturbanceConfig] = None,
    seed: int = 0,
    Tr: int = DEFAULT_TRANSIENT,
    mesh: MeshConfig = MeshConfig(),
    normalization: str = "policy",
    workers: int = 1,
) -> DimensionReport:
    """
    Roll out for T_ext steps and measure dimensions after the transient.

    A single policy is evaluated over `n_seeds` groups of rollouts; a
    sequence of policies (one per training seed) gets one group each.
    normalization="policy" meshes with the policy's frozen obs_stats,
    "rollout" refits stats on each rollout.
    """
    spec = _resolve(env)
    disturbance = disturbance or DisturbanceConfig()
    policies = list(policy) if isinstance(policy, (list, tuple)) else [policy] * n_seeds
    if normalization not in NORMALIZATIONS:
        raise ContractViolation(strings.ERROR_UNKNOWN_NORMALIZATION.format(normalization, list(NORMALIZATIONS)))
    if not policies or rollouts_per_seed < 1:
        raise ContractViolation(strings.ERROR_BAD_COUNT.format("rollouts", rollouts_per_seed))

    plan = []
    for group, member in enumerate(policies):
        for index, rollout_seed in enumerate(derive_seeds(seed, rollouts_per_seed, group)):
            plan.append((group, index, rollout_seed, member))

    refit = normalization == "rollout"
    jobs = [
        (spec, [plan[i][3] for i in chunk], T_ext, disturbance, [plan[i][2] for i in chunk], Tr, mesh, refit)
        for chunk in split_even(len(plan), workers)
    ]
    measured = [row for rows in ordered_map(_measure_job, jobs, workers) for row in rows]

    report = DimensionReport(env=spec.name, T=T_ext, disturbance=disturbance, normalization=normalization)
    for (group, index, rollout_seed, _), row in zip(plan, measured):
        report.rows.append({"seed_index": group, "rollout_index": index, "seed": rollout_seed, **row})
    return report


def _failure_job(job: Tuple) -> int:
    spec, policy, T, disturbance, seeds = job
    trajectories = rollout_policies(spec, [policy] * len(seeds), T, disturbance, seeds)
    return sum(traj.terminated_early for traj in trajectories)


def failure_rate(
    policy: LinearPolicy,
    env: EnvSpec | str,
    disturbance: Optional[DisturbanceConfig] = None,
    n_rollouts: int = 100,
    T: int = NOMINAL_LENGTH,
    seed: int = 0,
    workers: int = 1,
) -> RobustnessReport:
    """Fraction of seeded rollouts ending before T steps (failures and blowups)."""
    if n_rollouts < 1:
        raise ContractViolation(strings.ERROR_BAD_COUNT.format("n_rollouts", n_rollouts))
    spec = _resolve(env)
    disturbance = disturbance or DisturbanceConfig()
    seeds = derive_seeds(seed, n_rollouts)
    jobs = [(spec, policy, T, disturbance, [seeds[i] for i in chunk]) for chunk in split_even(n_rollouts, workers)]
    failures = sum(ordered_map(_failure_job, jobs, workers))
    return RobustnessReport(disturbance=disturbance, n_rollouts=n_rollouts, failure_count=int(failures))


def build_grid(kind: str, values: Sequence[float], push_rate: float = 0.2) -> List[DisturbanceConfig]:
    """One-parameter disturbance ladder: kind is 'action', 'obs' or 'push' (magnitudes at a fixed rate)."""
    if kind == "action":
        return [DisturbanceConfig(action_noise_std=v) for v in values]
    if kind == "obs":
        return [DisturbanceConfig(obs_noise_std=v) for v in values]
    if kind == "push":
        return [DisturbanceConfig(push_magnitude=v, push_rate=push_rate) for v in values]
    raise ContractViolation(strings.ERROR_UNKNOWN_DISTURBANCE.format(kind, list(DISTURBANCE_KINDS)))


def run_disturbance_grid(
    policy: LinearPolicy,
    env: EnvSpec | str,
    grid: Sequence[DisturbanceConfig],
    n_rollouts: int = 100,
    T: int = NOMINAL_LENGTH,
    seed: int = 0,
    workers: int = 1,
) -> List[RobustnessReport]:
    """Failure rate at every grid point; every point reuses the same rollout seeds."""
    if not grid:
        raise ContractViolation(strings.ERROR_EMPTY_GRID)
    reports = []
    for config in grid:
        report = failure_rate(policy, env, config, n_rollouts, T, seed, workers)
        logger.info(strings.LOG_GRID_POINT, config.label(), report.failure_rate)
        reports.append(report)
    return reports


def select_calibrated(reports: Sequence[RobustnessReport], target: float = 0.2) -> RobustnessReport:
    if not reports:
        raise ContractViolation(strings.ERROR_EMPTY_GRID)
    return min(reports, key=lambda r: (abs(r.failure_rate - target), r.disturbance.intensity_key()))


def disturbance_grid_search(
    policy: LinearPolicy,
    env: EnvSpec | str,
    grid: Sequence[DisturbanceConfig],
    target: float = 0.2,
    n_rollouts: int = 100,
    T: int = NOMINAL_LENGTH,
    seed: int = 0,
    workers: int = 1,
) -> DisturbanceConfig:
    reports = run_disturbance_grid(policy, env, grid, n_rollouts, T, seed, workers)
    return select_calibrated(reports, target).disturbance
