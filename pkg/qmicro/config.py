"""Runtime configuration.

Values come from the environment (prefix ``QMICRO_``) or a ``.env`` file in
the working directory, falling back to the defaults below.
"""

from functools import lru_cache
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI defaults."""

    model_config = SettingsConfigDict(
        env_prefix="QMICRO_", env_file=".env", extra="ignore"
    )

    # spectrum construction
    matrix_cap: int = Field(64, ge=1)
    merge_tolerance: float = Field(1e-9, ge=0.0)

    # density of states backing: auto picks rational for exact spectra
    backing: Literal["auto", "rational", "float"] = "auto"

    # thermodynamic curves
    grid_points: int = Field(2000, ge=2)

    # Monte Carlo oracle
    seed: int = 20070101
    oracle_samples: int = Field(1_000_000, ge=1)
    oracle_bins: int = Field(50, ge=10)
    oracle_window: float = Field(0.01, gt=0.0)
    oracle_alpha: float = Field(0.001, gt=0.0, lt=1.0)
    oracle_workers: int = Field(1, ge=1)
    oracle_chunk: int = Field(65536, ge=1)
    min_window_samples: int = Field(1000, ge=1)

    log_level: str = "WARNING"
    metrics_dir: Optional[str] = None


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Return the process-wide settings instance.

    Returns:
        Settings: Cached settings; call ``get_settings.cache_clear()`` after
        changing the environment.
    """
    return Settings()
