"""
Declarative configuration models and the postprocessor registry.

Defaults are the published hyperparameters: alpha=.02, sigma=.025, N=50,
b=20, f=1.5, d0=1e-2, Tr=200.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import strings


class PostprocessorKind(str, Enum):
    IDENTITY = "identity"
    LOWER_MESH = "lower-mesh"
    UPPER_MESH = "upper-mesh"
    MADOGRAM = "madogram"
    VARIOGRAM = "variogram"


POSTPROCESSORS: Dict[str, Dict[str, Any]] = {
    PostprocessorKind.IDENTITY.value: {
        "name": "Identity",
        "description": "Return passed through unchanged (dimension fixed at 1)",
        "clipped": False,
    },
    PostprocessorKind.LOWER_MESH.value: {
        "name": "Lower mesh dimension",
        "description": "Full-curve least-squares slope of the box-mesh curve",
        "clipped": True,
    },
    PostprocessorKind.UPPER_MESH.value: {
        "name": "Upper mesh dimension",
        "description": "Greatest local slope of the box-mesh curve",
        "clipped": True,
    },
    PostprocessorKind.MADOGRAM.value: {
        "name": "Madogram",
        "description": "Power-variation estimator of order 1, mean over coordinates",
        "clipped": True,
    },
    PostprocessorKind.VARIOGRAM.value: {
        "name": "Variogram",
        "description": "Power-variation estimator of order 2, mean over coordinates",
        "clipped": True,
    },
}


def get_all_postprocessors() -> List[str]:
    return list(POSTPROCESSORS.keys())


def get_postprocessor_info(kind: str) -> Dict[str, Any]:
    info = POSTPROCESSORS.get(kind.lower())
    if info is None:
        raise ValueError(strings.ERROR_UNKNOWN_POSTPROCESSOR.format(kind, get_all_postprocessors()))
    return info


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MeshConfig(StrictModel):
    f: float = Field(1.5, gt=1.0, description="Box-size scale factor")
    d0: float = Field(1e-2, gt=0.0, description="Initial box size")
    upper_window: int = Field(1, ge=1, description="Consecutive steps per local slope in the upper mesh dimension")


class PostprocessorConfig(StrictModel):
    kind: PostprocessorKind = PostprocessorKind.IDENTITY
    transient: int = Field(200, ge=0, description="Transient cutoff Tr")
    mesh: MeshConfig = MeshConfig()


class DisturbanceConfig(StrictModel):
    action_noise_std: float = Field(0.0, ge=0.0)
    obs_noise_std: float = Field(0.0, ge=0.0)
    push_magnitude: float = Field(0.0, ge=0.0)
    push_rate: float = Field(0.0, ge=0.0, le=1.0)

    @property
    def is_zero(self) -> bool:
        return self.action_noise_std == 0 and self.obs_noise_std == 0 and (
            self.push_magnitude == 0 or self.push_rate == 0
        )

    def intensity_key(self) -> tuple:
        """Ordering used to prefer the smaller disturbance on ties."""
        return (self.push_magnitude * self.push_rate, self.action_noise_std, self.obs_noise_std)

    def label(self) -> str:
        return (
            f"action={self.action_noise_std:g},obs={self.obs_noise_std:g},"
            f"push={self.push_magnitude:g}@{self.push_rate:g}"
        )


# observation/action noise used when measuring dimensions in noise mode
NOISE_MODE_DISTURBANCE = DisturbanceConfig(action_noise_std=0.001, obs_noise_std=0.01)


class ArsConfig(StrictModel):
    alpha: float = Field(0.02, gt=0.0, description="Step size")
    sigma: float = Field(0.025, gt=0.0, description="Exploration std")
    n_directions: int = Field(50, ge=1, description="Directions per epoch N")
    top_directions: int = Field(20, ge=1, description="Retained directions b")
    epochs: int = Field(100, ge=0)
    rollout_length: int = Field(1000, ge=1)
    eval_interval: int = Field(10, ge=0, description="Epochs between evaluations (0 disables)")
    eval_rollouts: int = Field(3, ge=1)
    checkpoint_interval: int = Field(50, ge=0, description="Epochs between checkpoints (0 disables)")
    seed: int = 0

    @model_validator(mode="after")
    def _check_top(self) -> "ArsConfig":
        if self.top_directions > self.n_directions:
            raise ValueError(f"top_directions ({self.top_directions}) must not exceed n_directions ({self.n_directions})")
        return self


class TwoPhaseConfig(StrictModel):
    base_epochs: int = Field(200, ge=0, description="Phase 1 epochs with the identity postprocessor")
    tune_epochs: int = Field(100, ge=0, description="Phase 2 epochs with the configured postprocessor")


class RunConfig(StrictModel):
    env: str = "pendulum"
    seeds: List[int] = Field(default_factory=lambda: [0])
    ars: ArsConfig = ArsConfig()
    post: PostprocessorConfig = PostprocessorConfig()
    two_phase: Optional[TwoPhaseConfig] = None
    disturbance: DisturbanceConfig = DisturbanceConfig()
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_env(self) -> "RunConfig":
        from .environments import get_all_environments

        if self.env not in get_all_environments():
            raise ValueError(strings.ERROR_UNKNOWN_ENV.format(self.env, get_all_environments()))
        return self
