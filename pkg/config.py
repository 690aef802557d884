import os

from pydantic import BaseModel, ConfigDict

# -----------------------------------------------------------------------------
# Numerical tolerances
# -----------------------------------------------------------------------------
UNITARY_TOL = 1e-9
STRUCTURAL_TOL = 1e-9
DISTANCE_TOL = 1e-6
# Pauli coefficients below this magnitude are dropped from sparse spectra
COEFFICIENT_CUTOFF = 1e-12

# -----------------------------------------------------------------------------
# Calibration defaults (see DESIGN.md, "Calibration constants")
# -----------------------------------------------------------------------------
DEFAULT_C_AA = 10.0
DEFAULT_C_GGT = 4.0
DEFAULT_C_T = 4.0

SCHEMA_VERSION = 1
# per invariant in verify reports
MAX_COUNTEREXAMPLES = 5


class Settings(BaseModel):
    """
    Environment-driven settings. Read once at import; tests build their own
    instances when they need different values.
    """
    model_config = ConfigDict(frozen=True)

    dense_qubit_cap: int = 8
    database_url: str = "sqlite:///./qjunta_runs.db"
    log_level: str = "WARNING"
    workers: int = 1


def load_settings() -> Settings:
    return Settings(
        dense_qubit_cap=int(os.environ.get("QJUNTA_DENSE_CAP", "8")),
        database_url=os.environ.get("QJUNTA_DATABASE_URL", "sqlite:///./qjunta_runs.db"),
        log_level=os.environ.get("QJUNTA_LOG_LEVEL", "WARNING").upper(),
        workers=int(os.environ.get("QJUNTA_WORKERS", "1")),
    )


settings = load_settings()


def resolve_seed(cli_seed: int) -> int:
    """QJUNTA_SEED wins over --seed. Read at call time, not import time."""
    env_seed = os.environ.get("QJUNTA_SEED")
    if env_seed not in (None, ""):
        return int(env_seed)
    return cli_seed
