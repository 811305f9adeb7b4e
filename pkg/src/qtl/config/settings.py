"""
Runtime configuration using Pydantic Settings.
Loads from QTL_* environment variables with .env file support.
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="QTL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_json: bool = Field(default=False, description="Render log events as JSON")

    # Execution
    max_workers: Optional[int] = Field(
        default=None,
        ge=1,
        description="Worker threads for samples, runs and sweep points (default: CPU count)",
    )
    max_dimension: int = Field(
        default=4096,
        ge=1000,
        description="Largest composite dimension accepted by exact propagation",
    )

    # Experiments
    output_dir: str = Field(default="results", description="Default output directory")
    default_seed: int = Field(
        default=20050101,
        ge=0,
        lt=2**64,
        description="Seed used when a scenario lists none and no --seed is given",
    )
    histogram_samples: int = Field(
        default=100_000, ge=1, description="Default number of accessible-region samples"
    )
    histogram_bins: int = Field(default=50, ge=1, description="Default entropy histogram bins")
    histogram_batch_size: int = Field(
        default=2048,
        ge=1,
        description="States drawn per sampling batch (one RNG sub-stream per batch)",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.
    Uses lru_cache to ensure settings are only loaded once.
    """
    return Settings()
