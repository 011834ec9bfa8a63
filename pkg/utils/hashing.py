# utils/hashing.py
import hashlib
import json
from typing import Any, Dict

import numpy as np


def config_hash(document: Dict[str, Any]) -> str:
    """Stable sha256 of a JSON-serialisable document (sorted keys)."""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def array_hash(values: np.ndarray) -> str:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    digest = hashlib.sha256(str(arr.shape).encode("ascii"))
    digest.update(arr.tobytes())
    return digest.hexdigest()[:16]
