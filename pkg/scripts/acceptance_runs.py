"""
Long-running acceptance checks: fractal oracles, mesh build scaling, the
pendulum learning bar, hopper dimension shaping (clean and noisy) and
failure-rate calibration of the identity hopper policy.

Usage:
    python scripts/acceptance_runs.py [--only fractals,scaling,learning,shaping] [--out runs/acceptance]
"""

import argparse
import copy
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.ars import ArsTrainer, train
from app.box_mesh import central_mesh_dim, create_box_mesh, lower_mesh_dim, mesh_curve, upper_mesh_dim
from app.evaluation import build_grid, disturbance_grid_search, evaluate_dimensions, failure_rate
from app.fractals import EXPECTED_DIMENSION, FractalSpec, generate
from app.models import NOISE_MODE_DISTURBANCE, ArsConfig
from app.settings import get_settings
from app.storage import write_frame
from app.trajectory import RunningStats
from utils.log import configure_logging

logger = logging.getLogger("acceptance")

FRACTAL_BANDS = [
    (FractalSpec("line", n_points=10_000), (0.9, 1.1)),
    (FractalSpec("square_uniform", n_points=100_000), (1.8, 2.1)),
    (FractalSpec("sierpinski", n_points=200_000, seed=1), (1.45, 1.72)),
    (FractalSpec("koch", level=7), (1.12, 1.40)),
    (FractalSpec("lorenz", n_points=100_000), (1.85, 2.25)),
]
SEEDS = range(5)


def check(name: str, passed: bool, **details) -> Dict:
    logger.info("%s: %s %s", name, "PASS" if passed else "FAIL", details)
    return {"check": name, "passed": bool(passed), **{k: details[k] for k in sorted(details)}}


def fractal_oracles() -> List[Dict]:
    rows = []
    for spec, (low, high) in FRACTAL_BANDS:
        start = time.perf_counter()
        curve = mesh_curve(generate(spec), f=1.5)
        central, lower, upper = central_mesh_dim(curve), lower_mesh_dim(curve), upper_mesh_dim(curve)
        elapsed = time.perf_counter() - start
        passed = low <= central <= high and elapsed < 30.0 and lower <= central <= upper + 0.05
        if spec.kind == "sierpinski":
            passed = passed and lower <= EXPECTED_DIMENSION["sierpinski"] <= upper
        rows.append(check(f"fractal:{spec.kind}", passed, central=central, lower=lower, upper=upper, seconds=elapsed))
    return rows


def mesh_scaling() -> List[Dict]:
    points = np.random.default_rng(0).random((200_000, 2))
    stats = RunningStats.from_batch(points)

    def median_time(n: int) -> float:
        times = []
        for _ in range(5):
            start = time.perf_counter()
            create_box_mesh(points[:n], 1e-3, stats)
            times.append(time.perf_counter() - start)
        return float(np.median(times))

    small, large = median_time(100_000), median_time(200_000)
    return [check("mesh-scaling", large <= 3.0 * small, ratio=large / small)]


def learning_bar() -> List[Dict]:
    cfg = ArsConfig(epochs=100, eval_interval=0, checkpoint_interval=0)
    start = time.perf_counter()
    first, last, shaped_first, shaped_last = [], [], [], []
    for seed in SEEDS:
        _, history = train("pendulum", cfg, "identity", seed=seed, progress=True)
        first.append(history.epochs[0].mean_raw)
        last.append(history.epochs[-1].mean_raw)
        shaped_first.append(history.epochs[0].mean_shaped)
        shaped_last.append(history.epochs[-1].mean_shaped)
    elapsed = time.perf_counter() - start
    return [
        check("learning-bar", np.median(last) >= 2.0 * np.median(first) and elapsed < 600,
              first=float(np.median(first)), last=float(np.median(last)), seconds=elapsed),
        check("shaped-progress", np.median(shaped_last) >= np.median(shaped_first)),
    ]


def train_shaping_pairs(base_epochs: int = 200, tune_epochs: int = 100):
    """Per seed: one identity phase, then a lower-mesh branch and an identity branch from the same state."""
    base = ArsConfig(epochs=base_epochs, eval_interval=0, checkpoint_interval=0)
    shaped, plain = [], []
    for seed in SEEDS:
        trainer = ArsTrainer("hopper1d", base, seed, progress=True)
        trainer.run(base_epochs, "identity", phase=1)
        twin = copy.deepcopy(trainer)
        trainer.run(tune_epochs, "lower-mesh", phase=2)
        twin.run(tune_epochs, "identity", phase=2)
        shaped.append(trainer.policy)
        plain.append(twin.policy)
    return shaped, plain


def shaping() -> List[Dict]:
    shaped, plain = train_shaping_pairs()
    rows = []
    for label, disturbance in [("clean", None), ("noisy", NOISE_MODE_DISTURBANCE)]:
        s = evaluate_dimensions(shaped, "hopper1d", disturbance=disturbance).frame()
        p = evaluate_dimensions(plain, "hopper1d", disturbance=disturbance).frame()
        s_dim, p_dim = float(s["lower_mesh"].median()), float(p["lower_mesh"].median())
        if label == "clean":
            s_raw, p_raw = float(s["raw_return"].median()), float(p["raw_return"].median())
            passed = s_dim < p_dim and s_raw >= 0.6 * p_raw
            rows.append(check("shaping:clean", passed, shaped_dim=s_dim, identity_dim=p_dim, shaped_raw=s_raw, identity_raw=p_raw))
        else:
            rows.append(check("shaping:noisy", s_dim <= p_dim, shaped_dim=s_dim, identity_dim=p_dim))

    entry = get_settings().grid("hopper1d", "push")
    grid = build_grid("push", entry.get("values", [0.0, 5.0, 10.0, 20.0, 40.0]), push_rate=entry.get("rate", 0.2))
    chosen = disturbance_grid_search(plain[0], "hopper1d", grid, target=0.2, n_rollouts=100)
    rate = failure_rate(plain[0], "hopper1d", chosen, n_rollouts=100).failure_rate
    rows.append(check("calibration", 0.10 <= rate <= 0.30, disturbance=chosen.label(), failure_rate=rate))
    return rows


CHECKS = {
    "fractals": fractal_oracles,
    "scaling": mesh_scaling,
    "learning": learning_bar,
    "shaping": shaping,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--only", default=",".join(CHECKS), help="Comma-separated subset of " + ", ".join(CHECKS))
    parser.add_argument("--out", default="runs/acceptance")
    args = parser.parse_args()
    configure_logging()

    rows = []
    for name in args.only.split(","):
        rows.extend(CHECKS[name.strip()]())
    frame = pd.DataFrame(rows)
    write_frame(frame, Path(args.out) / "acceptance.csv")
    print(frame.to_string(index=False))
    return 0 if frame["passed"].all() else 1


if __name__ == "__main__":
    sys.exit(main())
