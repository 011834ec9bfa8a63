"""
Example usage of dimshape
Demonstrates the estimators, the environments and a short training run
"""

import sys

import numpy as np

from app.ars import train, two_phase_train
from app.box_mesh import mesh_curve, mesh_dimensions
from app.environments import get_env_spec
from app.evaluation import evaluate_dimensions, failure_rate
from app.fractals import EXPECTED_DIMENSION, FractalSpec, generate
from app.models import NOISE_MODE_DISTURBANCE, ArsConfig, DisturbanceConfig
from app.postprocessors import postprocess_return
from app.rollout import rollout
from app.variation import madogram, variogram


def banner(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def example_fractal_dimensions():
    """Example 1: mesh dimensions of reference sets"""
    banner("Example 1: Fractal Dimensions")

    for spec in [FractalSpec("line"), FractalSpec("sierpinski", n_points=50_000), FractalSpec("koch", level=6)]:
        points = generate(spec)
        dims = mesh_dimensions(mesh_curve(points))
        print(
            f"{spec.kind:>12}: lower={dims.lower:.3f} central={dims.central:.3f} "
            f"upper={dims.upper:.3f} expected={EXPECTED_DIMENSION[spec.kind]:.3f}"
        )


def example_variation_estimators():
    """Example 2: madogram and variogram on random walks"""
    banner("Example 2: Variation Estimators")

    rng = np.random.default_rng(0)
    walk = rng.standard_normal((5000, 2)).cumsum(axis=0)
    noise = rng.standard_normal((5000, 2))
    print(f"random walk: madogram={madogram(walk):.3f} variogram={variogram(walk):.3f}")
    print(f"white noise: madogram={madogram(noise):.3f} variogram={variogram(noise):.3f}")


def example_shaped_returns():
    """Example 3: one hopper rollout through every postprocessor"""
    banner("Example 3: Shaped Returns")

    spec = get_env_spec("hopper1d")
    policy, _ = train(spec, ArsConfig(epochs=5, eval_interval=0, checkpoint_interval=0), "identity", seed=0)
    traj, raw = rollout(spec, policy, 1000, None, seed=1)
    print(f"raw return {raw:.2f} over {traj.length} steps")
    for kind in ["identity", "lower-mesh", "upper-mesh", "madogram", "variogram"]:
        shaped = postprocess_return(traj, kind, policy.obs_stats, spec.state_dim, coords=spec.meshed_coords)
        print(f"{kind:>12}: D={shaped.dimension_used:.3f} shaped={shaped.shaped:.2f}")


def example_two_phase():
    """Example 4: identity pre-training then lower-mesh fine tuning"""
    banner("Example 4: Two-Phase Training")

    base = ArsConfig(epochs=10, eval_interval=5, checkpoint_interval=0)
    tune = base.model_copy(update={"epochs": 5})
    policy, history = two_phase_train("hopper1d", base, tune, "lower-mesh", seed=0, progress=True)
    print(history.epoch_frame()[["epoch", "phase", "postprocessor", "mean_raw", "mean_dimension"]].to_string(index=False))
    print(f"phase boundary: {history.phase_boundary}")

    report = evaluate_dimensions(policy, "hopper1d", rollouts_per_seed=3, T_ext=2000)
    noisy = evaluate_dimensions(policy, "hopper1d", rollouts_per_seed=3, T_ext=2000, disturbance=NOISE_MODE_DISTURBANCE)
    for label, r in [("clean", report), ("noisy", noisy)]:
        mean, std = r.aggregates()["lower_mesh"]
        print(f"{label}: lower mesh {mean:.3f} +- {std:.3f}")


def example_robustness():
    """Example 5: failure rate under pushes"""
    banner("Example 5: Robustness")

    policy, _ = train("hopper1d", ArsConfig(epochs=5, eval_interval=0, checkpoint_interval=0), "identity", seed=0)
    for magnitude in [0.0, 10.0, 40.0]:
        report = failure_rate(policy, "hopper1d", DisturbanceConfig(push_magnitude=magnitude, push_rate=0.2), n_rollouts=20)
        print(f"push {magnitude:>5.1f} @ 0.2: failure rate {report.failure_rate:.2f}")


def main():
    print("\n" + "=" * 60)
    print("dimshape - Examples")
    print("=" * 60)

    try:
        example_fractal_dimensions()
        example_variation_estimators()
        example_shaped_returns()
        example_two_phase()
        example_robustness()

        print("\n" + "=" * 60)
        print("All examples completed successfully!")
        print("=" * 60)

    except Exception as e:
        print(f"\nError: {str(e)}")
        print("\nMake sure you have installed all dependencies: pip install -r requirements.txt")
        sys.exit(1)


if __name__ == "__main__":
    main()
