"""Runtime configuration: module constants with MAXDEP_* environment overrides."""
import os

ENV_PREFIX = "MAXDEP_"


def _env(name: str, default):
    """Read MAXDEP_<name> from the environment, cast to the type of default."""
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    return type(default)(raw)


# ──────────────────────────────────────────────
# MONTE CARLO DEFAULTS (overridable via env)
# ──────────────────────────────────────────────
DEFAULT_SAMPLES = _env("SAMPLES", 1_000_000)
DEFAULT_SEED = _env("SEED", 20240601)
DEFAULT_STREAMS = _env("STREAMS", 8)
DEFAULT_THREADS = _env("THREADS", 1)
STANDARDIZE_SAMPLES = _env("STANDARDIZE_SAMPLES", 10_000_000)

# ──────────────────────────────────────────────
# OUTPUT / LOGGING
# ──────────────────────────────────────────────
DEFAULT_FORMAT = _env("FORMAT", "csv")
LOG_LEVEL = _env("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
FLOAT_FORMAT = "%.17g"
SPEC_VERSION = 1

# ──────────────────────────────────────────────
# NUMERICAL TOLERANCES (not env-tunable)
# ──────────────────────────────────────────────
CONSTRUCTION_TOL = 1e-12     # simplex membership, exact margin checks
MASS_RTOL = 1e-9             # spectral mass constraints
IDENTITY_TOL = 1e-10         # algebraic identities (max-stability)
SE_MULTIPLIER = 3.0          # Monte Carlo bands
MAX_TAIL_DIMENSION = 25      # inclusion-exclusion over 2^d - 1 subsets
LOGISTIC_LOG_SPACE_THETA = 50.0
MERGE_DECIMALS = 12          # rounding used when merging equal profiles

# ──────────────────────────────────────────────
# VERIFICATION BATTERY
# ──────────────────────────────────────────────
VERIFY_POINTS = 100
ORACLE_POINTS = 50
ORACLE_MAX_EXCEEDANCES = 3
LIMIT_GRID_POINTS = 101
LIMIT_TOL = 1e-6
