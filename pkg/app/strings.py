"""
String constants for dimshape.
"""

# Contract / input errors
ERROR_DIM_MISMATCH = "dimension mismatch: expected {expected}, got {got}"
ERROR_NO_STATISTICS = "no statistics"
ERROR_EMPTY_STATE_SET = "empty state set"
ERROR_DEGENERATE_CURVE = "degenerate curve"
ERROR_BAD_BOX_SIZE = "box size must be positive, got {}"
ERROR_BAD_SCALE_FACTOR = "scale factor f must be > 1, got {}"
ERROR_BAD_TRANSIENT = "transient cutoff must be >= 0, got {}"
ERROR_SHORT_SERIES = "series needs at least 3 values, got {}"
ERROR_SHORT_TRAJECTORY = "trajectory needs at least 3 states, got {}"
ERROR_BAD_ORDER = "variation order p must be > 0, got {}"
ERROR_BAD_LAG = "lag must be 1 or 2, got {}"
ERROR_BAD_TOPOLOGICAL_DIM = "topological dimension must be >= 2, got {}"
ERROR_NO_REWARDS = "trajectory has no rewards"
ERROR_UNKNOWN_ENV = "unknown environment: {}. Available: {}"
ERROR_UNKNOWN_FRACTAL = "unknown fractal kind: {}. Available: {}"
ERROR_UNKNOWN_POSTPROCESSOR = "unknown postprocessor: {}. Available: {}"
ERROR_EMPTY_GRID = "disturbance grid is empty"
ERROR_UNKNOWN_DISTURBANCE = "unknown disturbance kind: {}. Available: {}"
ERROR_BAD_COUNT = "{} must be >= 1, got {}"
ERROR_RAGGED_ROWS = "{} rows must be non-empty and of equal length, got lengths {}"
ERROR_UNKNOWN_NORMALIZATION = "unknown normalization: {}. Available: {}"

# Simulation / training errors
ERROR_DYNAMICS_BLOWUP = "dynamics blowup"
ERROR_DIVERGED = "diverged"

# Persistence errors
ERROR_SCHEMA_VERSION = "policy file schema version {found} is newer than supported version {supported}"
ERROR_CORRUPT_FILE = "corrupt policy file {}: {}"
ERROR_UNREADABLE_INPUT = "cannot read input {}: {}"
ERROR_CONFIG = "invalid configuration: {}"

# Log messages
LOG_EPOCH = "epoch %d (phase %d): shaped=%.4f raw=%.4f"
LOG_EVAL = "eval @ epoch %d: raw=%.4f lower=%.4f madogram=%.4f"
LOG_NEGATIVE_RETURN = "shaped episode with negative raw return %.4f; dimension division inverts its incentive"
LOG_BLOWUP = "dynamics blowup in rollout %d at step %d; treated as failure"
LOG_DIVERGED = "training diverged at epoch %d; keeping last good policy"
LOG_WROTE = "wrote %s"
LOG_PHASE = "phase %d: %d epochs with %s postprocessor"
LOG_GRID_POINT = "grid point %s: failure rate %.3f"
LOG_SETTINGS_FALLBACK = "could not load config file %s: %s; using defaults"
