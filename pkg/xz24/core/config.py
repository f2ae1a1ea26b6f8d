"""Central place for XZ24 settings."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

BASE_DIR = Path(__file__).resolve().parents[2]
ENV_FILE = BASE_DIR / ".env"


class Settings(BaseSettings):
    """Defaults sourced from XZ24_* environment variables or .env."""

    workers: int = Field(default=1, ge=1)
    max_qubits: int = Field(default=14, ge=1)
    propagator_cache: int = Field(default=2, ge=0)

    peak_threshold: float = Field(default=1e-3, gt=0)
    leakage_margin: float = Field(default=1.5, ge=0)
    min_offset: float = Field(default=0.05, gt=0)
    offset_bins: int = Field(default=4, ge=1)

    seed: int = 0
    evaluator: Literal["circuit", "direct"] = "circuit"
    log_level: str = "WARNING"

    model_config = SettingsConfigDict(
        env_prefix="XZ24_",
        env_file=str(ENV_FILE),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    def default_offset(self, delta: float) -> float:
        """s0 = max(offset_bins * delta, min_offset)."""
        return max(self.offset_bins * delta, self.min_offset)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Reuse a single Settings instance across the process."""

    return Settings()
