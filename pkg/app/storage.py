"""
Persistence: policy files (JSON, lossless floats) and CSV/JSON report writers.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import strings
from .box_mesh import MeshCurve
from .errors import InputError, PolicyFileError, SchemaVersionError
from .policy import LinearPolicy
from .trajectory import RunningStats

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CURVE_COLUMNS = ["d", "m", "log10_d", "neg_log10_m"]


class StatsDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    count: int = Field(..., ge=0)
    mean: List[float]
    m2: List[float]


class Provenance(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config_hash: Optional[str] = None
    seed: Optional[int] = None
    postprocessor: Optional[str] = None
    epochs: int = 0
    phase_boundary: Optional[int] = None


class PolicyFile(BaseModel):
    """On-disk policy. Floats are written with repr, which round-trips exactly."""

    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    env: str
    weights: List[List[float]]
    obs_stats: StatsDocument
    provenance: Provenance = Provenance()

    @classmethod
    def from_policy(cls, policy: LinearPolicy, provenance: Optional[Provenance] = None) -> "PolicyFile":
        stats = policy.obs_stats
        return cls(
            env=policy.env_name,
            weights=policy.weights.tolist(),
            obs_stats=StatsDocument(count=stats.count, mean=stats.mean.tolist(), m2=stats.m2.tolist()),
            provenance=provenance or Provenance(),
        )

    def to_policy(self) -> LinearPolicy:
        stats = RunningStats(
            dim=len(self.obs_stats.mean),
            count=self.obs_stats.count,
            mean=np.array(self.obs_stats.mean, dtype=np.float64),
            m2=np.array(self.obs_stats.m2, dtype=np.float64),
        )
        return LinearPolicy(weights=np.array(self.weights, dtype=np.float64), obs_stats=stats, env_name=self.env)

    def dumps(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True) + "\n"


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def save_policy(policy: LinearPolicy, path: str | Path, provenance: Optional[Provenance] = None) -> PolicyFile:
    path = Path(path)
    document = PolicyFile.from_policy(policy, provenance)
    _ensure_parent(path)
    path.write_text(document.dumps(), encoding="utf-8")
    logger.info(strings.LOG_WROTE, path)
    return document


def read_policy_file(path: str | Path) -> PolicyFile:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise PolicyFileError(strings.ERROR_UNREADABLE_INPUT.format(path, e)) from e
    except json.JSONDecodeError as e:
        raise PolicyFileError(strings.ERROR_CORRUPT_FILE.format(path, e)) from e
    if not isinstance(raw, dict):
        raise PolicyFileError(strings.ERROR_CORRUPT_FILE.format(path, "top level is not an object"))

    version = raw.get("schema_version")
    if isinstance(version, int) and version > SCHEMA_VERSION:
        raise SchemaVersionError(strings.ERROR_SCHEMA_VERSION.format(found=version, supported=SCHEMA_VERSION))
    try:
        return PolicyFile.model_validate(raw)
    except ValidationError as e:
        raise PolicyFileError(strings.ERROR_CORRUPT_FILE.format(path, e)) from e


def load_policy(path: str | Path) -> LinearPolicy:
    document = read_policy_file(path)
    try:
        return document.to_policy()
    except ValueError as e:
        raise PolicyFileError(strings.ERROR_CORRUPT_FILE.format(path, e)) from e


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(strings.LOG_WROTE, path)
    return path


def write_rows(rows: Sequence[Dict[str, Any]], columns: Sequence[str], path: str | Path) -> Path:
    return write_frame(pd.DataFrame(list(rows), columns=list(columns)), path)


def write_curve_csv(curve: MeshCurve, path: str | Path) -> Path:
    return write_rows(curve.rows(), CURVE_COLUMNS, path)


def jsonable(value: Any) -> Any:
    """Plain JSON values; NaN becomes None and infinities the strings "inf" and "-inf"."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        return jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no NaN/inf; keep them readable
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def write_json(document: Dict[str, Any], path: str | Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    path.write_text(json.dumps(jsonable(document), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(strings.LOG_WROTE, path)
    return path


def read_points(path: str | Path) -> np.ndarray:
    """Point set from CSV (header optional) or whitespace-separated text; one point per row."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(strings.ERROR_UNREADABLE_INPUT.format(path, e)) from e
    lines = [line.strip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    rows = []
    for number, line in enumerate(lines):
        fields = line.replace(",", " ").split()
        try:
            rows.append([float(v) for v in fields])
        except ValueError as e:
            if number == 0 and not rows:
                continue  # header
            raise InputError(strings.ERROR_UNREADABLE_INPUT.format(path, e)) from e
    if not rows or len({len(r) for r in rows}) != 1:
        raise InputError(strings.ERROR_UNREADABLE_INPUT.format(path, "no rectangular numeric rows"))
    return np.array(rows, dtype=np.float64)
