"""
Command-line interface: `dimshape train | dim | robust | fractal | serve`.

Exit codes: 0 success, 1 invalid config / unreadable input / degenerate
result, 2 usage error, 3 training divergence.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import strings
from .ars import TrainHistory, train, two_phase_train
from .box_mesh import MeshCurve, mesh_curve, mesh_dimensions
from .environments import get_all_environments, get_env_spec
from .errors import ConfigError, DimshapeError, DivergedError
from .evaluation import (
    DISTURBANCE_KINDS,
    NORMALIZATIONS,
    build_grid,
    evaluate_dimensions,
    failure_rate,
    run_disturbance_grid,
    select_calibrated,
)
from .fractals import EXPECTED_DIMENSION, FractalSpec, generate, get_all_fractals
from .models import NOISE_MODE_DISTURBANCE, DisturbanceConfig, MeshConfig, RunConfig, get_all_postprocessors
from .policy import LinearPolicy
from .rollout import rollout
from .settings import Settings, get_settings
from .storage import (
    Provenance,
    load_policy,
    read_points,
    save_policy,
    write_curve_csv,
    write_frame,
    write_json,
    write_rows,
)
from .trajectory import RunningStats, post_transient
from .variation import madogram, variogram
from utils.hashing import config_hash
from utils.log import configure_logging
from utils.seeding import derive_seeds

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

ROBUSTNESS_COLUMNS = [
    "action_noise_std", "obs_noise_std", "push_magnitude", "push_rate",
    "n_rollouts", "failure_count", "failure_rate", "chosen",
]
SUMMARY_COLUMNS = ["seed", "epochs", "phase_boundary", "final_mean_raw", "final_mean_shaped", "policy"]


def _two_phase(value: str) -> Dict[str, int]:
    try:
        base, tune = (int(part) for part in value.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected BASE:TUNE epochs, got {value!r}")
    if base < 0 or tune < 0:
        raise argparse.ArgumentTypeError(f"epochs must be >= 0, got {value!r}")
    return {"base_epochs": base, "tune_epochs": tune}


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(strings.ERROR_BAD_COUNT.format("value", number))
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimshape", description="Trajectory-dimension reward shaping toolkit")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default: $LOG_LEVEL or INFO)")
    parser.add_argument("--quiet", action="store_true", help="Disable progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="Train ARS policies across seeds")
    p.add_argument("--config", help="Run document (JSON); defaults to data/run_config.json")
    p.add_argument("--env", choices=get_all_environments())
    p.add_argument("--post", choices=get_all_postprocessors())
    p.add_argument("--epochs", type=int, help="Single-phase epoch count")
    p.add_argument("--seeds", type=_positive, help="Train seeds 0..N-1")
    p.add_argument("--two-phase", type=_two_phase, metavar="BASE:TUNE", help="Identity for BASE epochs, then --post for TUNE")
    p.add_argument("--rollout-length", type=_positive)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_train_args)

    p = sub.add_parser("dim", help="Mesh curve and dimensions of a point set or a policy's trajectories")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--fractal", choices=get_all_fractals())
    source.add_argument("--points", help="Point file: CSV or whitespace separated, one point per row")
    source.add_argument("--policy", help="Policy file to roll out")
    p.add_argument("--n", type=_positive, default=10_000, help="Fractal points")
    p.add_argument("--level", type=_positive, default=7, help="Koch level")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--f", type=float, default=MeshConfig().f)
    p.add_argument("--d0", type=float, default=MeshConfig().d0)
    p.add_argument("--window", type=_positive, default=1, help="Steps per local slope in the upper mesh dimension")
    p.add_argument("--episodes", type=_positive, default=5, help="Rollouts per policy")
    p.add_argument("--len", dest="length", type=_positive, default=10_000, help="Extended episode length")
    p.add_argument("--transient", type=int, default=200)
    p.add_argument("--noise", action="store_true", help="Action std .001 and observation std .01")
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="policy")
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_dim_args)

    p = sub.add_parser("robust", help="Failure rates under disturbances")
    p.add_argument("--policy", required=True)
    p.add_argument("--action-noise", type=float, default=0.0)
    p.add_argument("--obs-noise", type=float, default=0.0)
    p.add_argument("--push-magnitude", type=float, default=0.0)
    p.add_argument("--push-rate", type=float, default=0.0)
    p.add_argument("--grid", choices=DISTURBANCE_KINDS, help="Sweep one disturbance kind")
    p.add_argument("--values", type=float, nargs="+", help="Grid values (default: data/disturbance_grids.json)")
    p.add_argument("--calibrate", type=float, metavar="TARGET", help="Pick the grid point nearest this failure rate")
    p.add_argument("--n", type=_positive, default=100, help="Rollouts per configuration")
    p.add_argument("--len", dest="length", type=_positive, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_robust_args)

    p = sub.add_parser("fractal", help="Write a reference point set")
    p.add_argument("--kind", choices=get_all_fractals(), required=True)
    p.add_argument("--n", type=_positive, default=10_000)
    p.add_argument("--level", type=_positive, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_fractal_args)

    p = sub.add_parser("serve", help="Run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve_args)
    return parser


# train

def _train_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.env:
        overrides["env"] = args.env
    if args.seeds:
        overrides["seeds"] = list(range(args.seeds))
    ars: Dict[str, Any] = {}
    if args.epochs is not None:
        ars["epochs"] = args.epochs
    if args.rollout_length:
        ars["rollout_length"] = args.rollout_length
    if ars:
        overrides["ars"] = ars
    if args.post:
        overrides["post"] = {"kind": args.post}
    if args.two_phase:
        overrides["two_phase"] = args.two_phase
    return overrides


def _write_history(history: TrainHistory, run_dir: Path) -> None:
    write_frame(history.epoch_frame(), run_dir / "history.csv")
    write_frame(history.eval_frame(), run_dir / "evals.csv")


def cmd_train(config: RunConfig, out_dir: Path, workers: int = 1, progress: bool = True) -> int:
    """Train every requested seed; returns an exit code."""
    digest = config_hash(config.model_dump(mode="json"))
    post_name = config.post.kind.value
    tag = f"{config.env}_{post_name}" + ("_two_phase" if config.two_phase else "")
    summary: List[Dict[str, Any]] = []
    status = EXIT_OK

    for seed in config.seeds:
        run_dir = out_dir / tag / f"seed_{seed}"
        provenance = dict(config_hash=digest, seed=seed, postprocessor=post_name)

        def checkpoint(policy: LinearPolicy, epoch: int) -> None:
            save_policy(policy, run_dir / "checkpoints" / f"epoch_{epoch:05d}.json", Provenance(epochs=epoch, **provenance))

        try:
            if config.two_phase:
                base = config.ars.model_copy(update={"epochs": config.two_phase.base_epochs})
                tune = config.ars.model_copy(update={"epochs": config.two_phase.tune_epochs})
                policy, history = two_phase_train(
                    config.env, base, tune, config.post, seed, workers, config.disturbance, checkpoint, progress
                )
            else:
                policy, history = train(
                    config.env, config.ars, config.post, seed, workers, config.disturbance, checkpoint, progress
                )
        except DivergedError as e:
            if e.last_good is not None:
                save_policy(e.last_good, run_dir / "policy_last_good.json", Provenance(epochs=max(e.epoch - 1, 0), **provenance))
            if e.history is not None:
                _write_history(e.history, run_dir)
            print(f"seed {seed}: {e} at epoch {e.epoch}", file=sys.stderr)
            status = EXIT_DIVERGED
            continue

        policy_path = run_dir / "policy.json"
        save_policy(policy, policy_path, Provenance(epochs=len(history), phase_boundary=history.phase_boundary, **provenance))
        _write_history(history, run_dir)
        last = history.epochs[-1] if history.epochs else None
        summary.append({
            "seed": seed,
            "epochs": len(history),
            "phase_boundary": history.phase_boundary,
            "final_mean_raw": last.mean_raw if last else math.nan,
            "final_mean_shaped": last.mean_shaped if last else math.nan,
            "policy": str(policy_path),
        })

    write_rows(summary, SUMMARY_COLUMNS, out_dir / tag / "summary.csv")
    write_json(config.model_dump(mode="json"), out_dir / tag / "config.json")
    return status


def cmd_train_args(args: argparse.Namespace, settings: Settings) -> int:
    config = settings.run_config(_train_overrides(args), path=args.config)
    return cmd_train(config, settings.out_dir(args.out), settings.workers(args.workers, config), not args.quiet)


# dim

def _print_dims(label: str, values: Dict[str, float]) -> None:
    print(label)
    for key, value in values.items():
        print(f"  {key:>14}: {value:.6f}" if isinstance(value, float) else f"  {key:>14}: {value}")


def _sequence_dims(points: np.ndarray) -> Dict[str, float]:
    if len(points) < 3:
        return {"madogram": math.nan, "variogram": math.nan}
    return {"madogram": madogram(points), "variogram": variogram(points)}


def cmd_dim_points(points: np.ndarray, mesh: MeshConfig, out_dir: Path, expected: Optional[float] = None) -> int:
    curve = mesh_curve(points, f=mesh.f, d0=mesh.d0)
    write_curve_csv(curve, out_dir / "curve.csv")
    dims = mesh_dimensions(curve, window=mesh.upper_window)
    values = {"n_points": len(points), "lower_mesh": dims.lower, "upper_mesh": dims.upper, "central_mesh": dims.central}
    values.update(_sequence_dims(points))
    if expected is not None:
        values["expected"] = expected
    write_json(values, out_dir / "dimensions.json")
    _print_dims("dimensions", values)
    return EXIT_OK


def _policy_curve(policy: LinearPolicy, args: argparse.Namespace, disturbance: DisturbanceConfig) -> MeshCurve:
    spec = get_env_spec(policy.env_name)
    first_seed = derive_seeds(args.seed, args.episodes, 0)[0]
    traj, _ = rollout(spec, policy, args.length, disturbance, first_seed)
    states = post_transient(traj, args.transient)[:, list(spec.meshed_coords)]
    stats = None
    if args.normalization == "policy":
        stats = policy.obs_stats.select(spec.meshed_coords) if policy.obs_stats.count else RunningStats.identity(spec.state_dim)
    return mesh_curve(states, f=args.f, d0=args.d0, stats=stats)


def cmd_dim_policy(args: argparse.Namespace, mesh: MeshConfig, out_dir: Path, workers: int) -> int:
    policy = load_policy(args.policy)
    disturbance = NOISE_MODE_DISTURBANCE if args.noise else DisturbanceConfig()
    report = evaluate_dimensions(
        policy,
        policy.env_name,
        n_seeds=1,
        rollouts_per_seed=args.episodes,
        T_ext=args.length,
        disturbance=disturbance,
        seed=args.seed,
        Tr=args.transient,
        mesh=mesh,
        normalization=args.normalization,
        workers=workers,
    )
    write_frame(report.frame(), out_dir / "dimension_report.csv")
    write_json(report.to_dict(), out_dir / "dimension_report.json")
    write_curve_csv(_policy_curve(policy, args, disturbance), out_dir / "curve.csv")
    _print_dims("mean over rollouts", {k: m for k, (m, _) in report.aggregates().items()})
    return EXIT_OK


def cmd_dim_args(args: argparse.Namespace, settings: Settings) -> int:
    mesh = MeshConfig(f=args.f, d0=args.d0, upper_window=args.window)
    out_dir = settings.out_dir(args.out)
    if args.policy:
        return cmd_dim_policy(args, mesh, out_dir, settings.workers(args.workers))
    if args.fractal:
        points = generate(FractalSpec(kind=args.fractal, n_points=args.n, seed=args.seed, level=args.level))
        return cmd_dim_points(points, mesh, out_dir, EXPECTED_DIMENSION[args.fractal])
    return cmd_dim_points(read_points(args.points), mesh, out_dir)


# robust

def _grid_values(args: argparse.Namespace, settings: Settings, env: str) -> List[DisturbanceConfig]:
    entry = settings.grid(env, args.grid)
    values = args.values or entry.get("values")
    if not values:
        raise ConfigError(strings.ERROR_EMPTY_GRID)
    return build_grid(args.grid, values, push_rate=entry.get("rate", args.push_rate or 0.2))


def cmd_robust_args(args: argparse.Namespace, settings: Settings) -> int:
    policy = load_policy(args.policy)
    out_dir = settings.out_dir(args.out)
    workers = settings.workers(args.workers)

    if args.calibrate is not None and not args.grid:
        args.grid = "push"
    if args.grid:
        grid = _grid_values(args, settings, policy.env_name)
        reports = run_disturbance_grid(policy, policy.env_name, grid, args.n, args.length, args.seed, workers)
    else:
        fixed = DisturbanceConfig(
            action_noise_std=args.action_noise,
            obs_noise_std=args.obs_noise,
            push_magnitude=args.push_magnitude,
            push_rate=args.push_rate,
        )
        reports = [failure_rate(policy, policy.env_name, fixed, args.n, args.length, args.seed, workers)]

    chosen = select_calibrated(reports, args.calibrate) if args.calibrate is not None else None
    rows = [{**r.to_row(), "chosen": r is chosen} for r in reports]
    write_rows(rows, ROBUSTNESS_COLUMNS, out_dir / "robustness.csv")
    print(pd.DataFrame(rows, columns=ROBUSTNESS_COLUMNS).to_string(index=False))
    if chosen is not None:
        print(f"calibrated: {chosen.disturbance.label()} (failure rate {chosen.failure_rate:.3f})")
    return EXIT_OK


# fractal

def cmd_fractal_args(args: argparse.Namespace, settings: Settings) -> int:
    points = generate(FractalSpec(kind=args.kind, n_points=args.n, seed=args.seed, level=args.level))
    columns = ["x", "y", "z"][: points.shape[1]]
    write_frame(pd.DataFrame(points, columns=columns), settings.out_dir(args.out) / f"{args.kind}.csv")
    print(f"{args.kind}: {len(points)} points, expected dimension {EXPECTED_DIMENSION[args.kind]:.4f}")
    return EXIT_OK


def cmd_serve_args(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    uvicorn.run("app.api:app", host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args, get_settings())
    except DivergedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DimshapeError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
