"""
Augmented Random Search (V2t) over static linear policies.

Per epoch: N Gaussian directions are sampled, the policy is rolled out at
M + sigma*delta and M - sigma*delta with a shared seed per pair, returns are
passed through the configured postprocessor, and the top-b directions move
the weights. Observation statistics are frozen during an epoch and merged
once at its end, in rollout-index order, so the result does not depend on
how rollouts were spread over workers.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from . import strings
from .environments import EnvSpec, get_env_spec
from .errors import ContractViolation, DivergedError
from .evaluation import DIMENSION_COLUMNS, measure_trajectory
from .models import ArsConfig, DisturbanceConfig, MeshConfig, PostprocessorConfig, PostprocessorKind
from .parallel import ordered_map, split_even
from .policy import LinearPolicy, NormalizationSnapshot
from .postprocessors import postprocess_return
from .rollout import rollout_batch
from .trajectory import STD_FLOOR, RunningStats, merge_all
from utils.hashing import array_hash
from utils.seeding import derive_seeds

logger = logging.getLogger(__name__)

PostSelection = Optional[PostprocessorConfig | PostprocessorKind | str]
CheckpointCallback = Callable[[LinearPolicy, int], None]


@dataclass
class EpochRecord:
    epoch: int
    phase: int
    postprocessor: str
    mean_shaped: float
    mean_raw: float
    max_raw: float
    mean_dimension: float
    policy_hash: str


@dataclass
class EvalRecord:
    epoch: int
    phase: int
    mean_raw: float
    lower_mesh: float
    upper_mesh: float
    central_mesh: float
    madogram: float
    variogram: float


@dataclass
class TrainHistory:
    """One EpochRecord per completed epoch; phase_boundary is the phase-1 epoch count for two-phase runs."""

    epochs: List[EpochRecord] = field(default_factory=list)
    evals: List[EvalRecord] = field(default_factory=list)
    phase_boundary: Optional[int] = None

    def __len__(self) -> int:
        return len(self.epochs)

    def epoch_frame(self) -> pd.DataFrame:
        columns = list(EpochRecord.__dataclass_fields__)
        return pd.DataFrame([asdict(r) for r in self.epochs], columns=columns)

    def eval_frame(self) -> pd.DataFrame:
        columns = list(EvalRecord.__dataclass_fields__)
        return pd.DataFrame([asdict(r) for r in self.evals], columns=columns)

    def weight_hashes(self) -> List[str]:
        return [r.policy_hash for r in self.epochs]


@dataclass
class RolloutJob:
    spec: EnvSpec
    weights: np.ndarray
    snapshot: NormalizationSnapshot
    stats: RunningStats
    T: int
    disturbance: DisturbanceConfig
    seeds: List[int]
    post: Optional[PostprocessorConfig]


@dataclass
class RolloutOutcome:
    shaped: List[float]
    raw: List[float]
    dimensions: List[float]
    visited: List[RunningStats]


@dataclass
class EpochResult:
    policy: LinearPolicy
    mean_shaped: float
    mean_raw: float
    max_raw: float
    mean_dimension: float


def _simulate_chunk(job: RolloutJob) -> RolloutOutcome:
    trajectories = rollout_batch(job.spec, job.weights, job.snapshot, job.T, job.disturbance, job.seeds)
    outcome = RolloutOutcome(shaped=[], raw=[], dimensions=[], visited=[])
    for traj in trajectories:
        if job.post is not None and traj.length == 0:
            # blew up on the first step: no rewards to shape, maximum penalty
            identity = job.post.kind == PostprocessorKind.IDENTITY
            outcome.shaped.append(0.0)
            outcome.raw.append(0.0)
            outcome.dimensions.append(1.0 if identity else job.spec.state_dim / 2.0)
        elif job.post is None:
            raw = traj.raw_return
            outcome.shaped.append(raw)
            outcome.raw.append(raw)
            outcome.dimensions.append(1.0)
        else:
            result = postprocess_return(traj, job.post, job.stats, job.spec.state_dim, coords=job.spec.meshed_coords)
            outcome.shaped.append(result.shaped)
            outcome.raw.append(result.raw_return)
            outcome.dimensions.append(result.dimension_used)
        outcome.visited.append(RunningStats.from_batch(traj.states))
    return outcome


def _post_config(post: PostSelection) -> Optional[PostprocessorConfig]:
    if post is None or isinstance(post, PostprocessorConfig):
        return post
    return PostprocessorConfig(kind=PostprocessorKind(post))


def _post_name(post: Optional[PostprocessorConfig]) -> str:
    return "none" if post is None else post.kind.value


def top_direction_indices(r_plus: np.ndarray, r_minus: np.ndarray, b: int) -> np.ndarray:
    """Indices of the b directions with the largest max(r+, r-), in increasing index order."""
    scores = np.maximum(np.asarray(r_plus, dtype=np.float64), np.asarray(r_minus, dtype=np.float64))
    order = np.argsort(-scores, kind="stable")[:b]
    return np.sort(order)


def ars_update(
    weights: np.ndarray,
    deltas: np.ndarray,
    r_plus: Sequence[float],
    r_minus: Sequence[float],
    cfg: ArsConfig,
) -> np.ndarray:
    """M + alpha / (b * sigma_R) * sum over the top b of (r+ - r-) * delta."""
    r_plus = np.asarray(r_plus, dtype=np.float64)
    r_minus = np.asarray(r_minus, dtype=np.float64)
    b = min(cfg.top_directions, len(r_plus))
    top = top_direction_indices(r_plus, r_minus, b)
    retained = np.concatenate([r_plus[top], r_minus[top]])
    sigma_r = max(float(np.std(retained)), STD_FLOOR)

    step = np.zeros_like(weights, dtype=np.float64)
    for k in top:
        step = step + (r_plus[k] - r_minus[k]) * deltas[k]
    return weights + (cfg.alpha / (b * sigma_r)) * step


def run_epoch(
    policy: LinearPolicy,
    spec: EnvSpec,
    cfg: ArsConfig,
    post: PostSelection,
    rng: np.random.Generator,
    workers: int = 1,
    disturbance: Optional[DisturbanceConfig] = None,
    epoch: int = -1,
) -> EpochResult:
    """One ARS epoch; the returned policy carries updated weights and merged obs_stats."""
    if policy.weights.shape != (spec.action_dim, spec.obs_dim):
        raise ContractViolation(
            strings.ERROR_DIM_MISMATCH.format(expected=(spec.action_dim, spec.obs_dim), got=policy.weights.shape)
        )
    post = _post_config(post)
    n = cfg.n_directions
    deltas = rng.standard_normal((n, spec.action_dim, spec.obs_dim))
    pair_seeds = rng.integers(0, 2**32, size=n, dtype=np.uint64)

    # rollout 2k is M + sigma*delta_k, rollout 2k+1 is M - sigma*delta_k
    perturbed = np.empty((2 * n, spec.action_dim, spec.obs_dim))
    perturbed[0::2] = policy.weights + cfg.sigma * deltas
    perturbed[1::2] = policy.weights - cfg.sigma * deltas
    seeds = np.repeat(pair_seeds, 2).tolist()

    snapshot = policy.normalization()
    frozen = policy.obs_stats.copy()
    disturbance = disturbance or DisturbanceConfig()
    jobs = [
        RolloutJob(
            spec=spec,
            weights=perturbed[chunk.start:chunk.stop],
            snapshot=snapshot,
            stats=frozen,
            T=cfg.rollout_length,
            disturbance=disturbance,
            seeds=[int(s) for s in seeds[chunk.start:chunk.stop]],
            post=post,
        )
        for chunk in split_even(2 * n, workers)
    ]
    outcomes = ordered_map(_simulate_chunk, jobs, workers)

    shaped = np.array([v for o in outcomes for v in o.shaped])
    raw = np.array([v for o in outcomes for v in o.raw])
    dimensions = np.array([v for o in outcomes for v in o.dimensions])
    visited = [s for o in outcomes for s in o.visited]

    if post is not None and post.kind != PostprocessorKind.IDENTITY and np.any(raw < 0):
        logger.warning(strings.LOG_NEGATIVE_RETURN, float(raw.min()))

    weights = ars_update(policy.weights, deltas, shaped[0::2], shaped[1::2], cfg)
    if not np.all(np.isfinite(weights)):
        logger.error(strings.LOG_DIVERGED, epoch)
        raise DivergedError(strings.ERROR_DIVERGED, last_good=policy.copy(), epoch=epoch)

    stats = merge_all([policy.obs_stats, *visited], dim=spec.obs_dim)
    return EpochResult(
        policy=LinearPolicy(weights=weights, obs_stats=stats, env_name=policy.env_name),
        mean_shaped=float(shaped.mean()),
        mean_raw=float(raw.mean()),
        max_raw=float(raw.max()),
        mean_dimension=float(dimensions.mean()),
    )


def ars_epoch(
    policy: LinearPolicy,
    env: EnvSpec | str,
    cfg: ArsConfig,
    post: PostSelection,
    rng: np.random.Generator,
    workers: int = 1,
    disturbance: Optional[DisturbanceConfig] = None,
) -> LinearPolicy:
    spec = env if isinstance(env, EnvSpec) else get_env_spec(env)
    return run_epoch(policy, spec, cfg, post, rng, workers, disturbance).policy


class ArsTrainer:
    """
    Stateful ARS loop: one RNG stream, a live policy, and the history so far.

    Phases can be chained on the same trainer; weights, obs_stats, the RNG
    stream and the epoch counter all carry over.
    """

    def __init__(
        self,
        env: EnvSpec | str,
        cfg: ArsConfig,
        seed: Optional[int] = None,
        policy: Optional[LinearPolicy] = None,
        workers: int = 1,
        disturbance: Optional[DisturbanceConfig] = None,
        checkpoint: Optional[CheckpointCallback] = None,
        progress: bool = False,
    ):
        self.spec = env if isinstance(env, EnvSpec) else get_env_spec(env)
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self.policy = policy.copy() if policy is not None else LinearPolicy.zeros(self.spec)
        self.workers = max(1, workers)
        self.disturbance = disturbance
        self.checkpoint = checkpoint
        self.progress = progress
        self.history = TrainHistory()
        self.epoch = 0

    def step(self, post: PostSelection, phase: int = 1) -> EpochRecord:
        post = _post_config(post)
        epoch = self.epoch + 1
        result = run_epoch(
            self.policy, self.spec, self.cfg, post, self.rng, self.workers, self.disturbance, epoch=epoch
        )
        self.policy = result.policy
        self.epoch = epoch
        record = EpochRecord(
            epoch=epoch,
            phase=phase,
            postprocessor=_post_name(post),
            mean_shaped=result.mean_shaped,
            mean_raw=result.mean_raw,
            max_raw=result.max_raw,
            mean_dimension=result.mean_dimension,
            policy_hash=array_hash(self.policy.weights),
        )
        self.history.epochs.append(record)
        logger.info(strings.LOG_EPOCH, epoch, phase, record.mean_shaped, record.mean_raw)

        if self.cfg.eval_interval and epoch % self.cfg.eval_interval == 0:
            self.history.evals.append(self.evaluate(post, phase))
        if self.checkpoint is not None and self.cfg.checkpoint_interval and epoch % self.cfg.checkpoint_interval == 0:
            self.checkpoint(self.policy, epoch)
        return record

    def evaluate(self, post: Optional[PostprocessorConfig], phase: int) -> EvalRecord:
        """Unperturbed rollouts seeded from (seed, epoch), outside the training RNG stream."""
        transient = post.transient if post is not None else PostprocessorConfig().transient
        mesh = post.mesh if post is not None else MeshConfig()
        seeds = derive_seeds(self.seed, self.cfg.eval_rollouts, self.epoch)
        weights = np.repeat(self.policy.weights[None], len(seeds), axis=0)
        trajectories = rollout_batch(
            self.spec, weights, self.policy.normalization(), self.cfg.rollout_length, self.disturbance, seeds
        )
        rows = [measure_trajectory(t, self.spec, self.policy.obs_stats, transient, mesh) for t in trajectories]
        means = {c: _nanmean([r[c] for r in rows]) for c in DIMENSION_COLUMNS}
        record = EvalRecord(
            epoch=self.epoch,
            phase=phase,
            mean_raw=float(np.mean([t.raw_return for t in trajectories])),
            **means,
        )
        logger.info(strings.LOG_EVAL, record.epoch, record.mean_raw, record.lower_mesh, record.madogram)
        return record

    def run(self, epochs: int, post: PostSelection, phase: int = 1) -> TrainHistory:
        post = _post_config(post)
        logger.info(strings.LOG_PHASE, phase, epochs, _post_name(post))
        for _ in tqdm(range(epochs), desc=f"{self.spec.name} phase {phase}", disable=not self.progress):
            try:
                self.step(post, phase)
            except DivergedError as e:
                e.history = self.history
                raise
        return self.history


def _nanmean(values: List[float]) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return float(np.mean(finite)) if finite else math.nan


def train(
    env: EnvSpec | str,
    cfg: ArsConfig,
    post: PostSelection = None,
    seed: Optional[int] = None,
    workers: int = 1,
    disturbance: Optional[DisturbanceConfig] = None,
    checkpoint: Optional[CheckpointCallback] = None,
    progress: bool = False,
) -> Tuple[LinearPolicy, TrainHistory]:
    """cfg.epochs epochs from zero weights; post=None trains without any postprocessing layer."""
    trainer = ArsTrainer(env, cfg, seed, workers=workers, disturbance=disturbance, checkpoint=checkpoint, progress=progress)
    trainer.run(cfg.epochs, post, phase=1)
    return trainer.policy, trainer.history


def two_phase_train(
    env: EnvSpec | str,
    cfg_base: ArsConfig,
    cfg_tune: ArsConfig,
    post_tune: PostSelection,
    seed: Optional[int] = None,
    workers: int = 1,
    disturbance: Optional[DisturbanceConfig] = None,
    checkpoint: Optional[CheckpointCallback] = None,
    progress: bool = False,
) -> Tuple[LinearPolicy, TrainHistory]:
    """
    Identity for cfg_base.epochs, then post_tune for cfg_tune.epochs on the
    same weights and obs_stats. Stats keep updating in phase 2.
    """
    tune = _post_config(post_tune)
    base = PostprocessorConfig(
        kind=PostprocessorKind.IDENTITY,
        transient=tune.transient if tune is not None else PostprocessorConfig().transient,
        mesh=tune.mesh if tune is not None else MeshConfig(),
    )
    trainer = ArsTrainer(
        env, cfg_base, seed, workers=workers, disturbance=disturbance, checkpoint=checkpoint, progress=progress
    )
    trainer.run(cfg_base.epochs, base, phase=1)
    trainer.history.phase_boundary = trainer.epoch
    trainer.cfg = cfg_tune
    trainer.run(cfg_tune.epochs, tune, phase=2)
    return trainer.policy, trainer.history
