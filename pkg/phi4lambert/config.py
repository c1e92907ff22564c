"""
Numerical Settings

Tolerances, iteration caps and sample counts shared by the services and the
CLI. Values come from the environment or a .env file in the working
directory; get_settings() caches one instance per process.
"""

from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Numerical settings loaded from environment variables.

    Every tolerance and size used by the services has a default here, so
    nothing needs to be set for a normal run. Override any field with an
    environment variable of the same name (e.g. QUAD_REL_TOL=1e-8) or a
    line in .env.
    """

    # Logging Configuration
    log_level: str = "WARNING"

    # Quadrature defaults (QuadSpec.from_settings)
    quad_abs_tol: float = Field(default=1e-10, gt=0)
    quad_rel_tol: float = Field(default=1e-10, gt=0)
    quad_max_subdivisions: int = Field(default=2000, ge=1)
    quad_tail_cutoff: float = Field(default=1e4, gt=0)

    # Closed form
    n_truncation: float = Field(default=1e4, gt=0)  # t-range of the N integral
    lambert_max_iter: int = Field(default=100, ge=1)

    # Domain geometry
    curve_samples: int = Field(default=4096, ge=2)
    boundary_band: float = Field(default=1e-9, gt=0)

    # Fixed-point oracle
    oracle_damping: float = Field(default=0.2, gt=0, le=1)
    oracle_max_iter: int = Field(default=2000, ge=1)
    oracle_tol: float = Field(default=1e-10, gt=0)

    # Identity suite
    verify_tolerance: float = Field(default=1e-6, gt=0)

    # Optional worker count for grid sweeps (unset = serial)
    threads: int | None = Field(default=None, ge=1)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="",  # No prefix, use exact names
    )

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level


@lru_cache
def get_settings() -> Settings:
    """
    Get application settings (cached).

    Usage:
        from phi4lambert.config import get_settings
        settings = get_settings()
        print(settings.quad_rel_tol)
    """
    return Settings()
