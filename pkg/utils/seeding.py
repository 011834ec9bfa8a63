# utils/seeding.py
from typing import List

import numpy as np


def derive_seeds(seed: int, count: int, *path: int) -> List[int]:
    """Independent child seeds for `count` rollouts, keyed by `seed` and an optional path."""
    sequence = np.random.SeedSequence([int(seed), *[int(p) for p in path]])
    return [int(s) for s in sequence.generate_state(count, dtype=np.uint32)]
