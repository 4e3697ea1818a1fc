"""Application configuration using Pydantic Settings."""

from __future__ import annotations

import math
from pathlib import Path
from functools import lru_cache

from pydantic_settings import BaseSettings
from pydantic import Field


# Project root directory
PROJECT_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """Central engine settings, loaded from FERROZX_* environment variables / .env file."""

    # ── Reproducibility ──
    seed: int = Field(default=0, description="Seed for every random draw of a run")

    # ── Numerics ──
    tolerance: float = Field(
        default=1e-9, description="Absolute max-norm tolerance for tensor equality"
    )
    order_tolerance: float = Field(
        default=1e-12, description="Tolerance for contraction-order independence checks"
    )
    singular_threshold: float = Field(
        default=1e-12, description="Relative |det D| below which a Schur block is singular"
    )
    phase_snap: float = Field(
        default=1e-12, description="Snap window for phases near 0 and pi"
    )
    parity_tolerance: float = Field(
        default=1e-12, description="Relative size below which off-parity entries are roundoff"
    )

    # ── Capacity ──
    max_legs: int = Field(default=22, description="Largest boundary a run evaluates densely")
    capacity_legs: int = Field(
        default=26, description="Hard refusal limit for any dense tensor"
    )

    # ── Rule sweep ──
    max_arity: int = Field(default=4, description="Largest leg count per side in a sweep")
    phase_samples: list[float] = Field(
        default=[0.0, math.pi / 2, math.pi, 1.2345],
        description="Phases every parametric rule is verified at",
    )

    # ── Parallelism ──
    threads: int = Field(default=1, description="Worker cap for independent checks")

    # ── Paths ──
    data_dir: Path = Field(default=PROJECT_ROOT / "data")
    samples_dir: Path = Field(default=PROJECT_ROOT / "data" / "samples")
    catalog_dir: Path = Field(default=PROJECT_ROOT / "catalog")
    results_dir: Path = Field(default=PROJECT_ROOT / "evaluation" / "results")

    model_config = {
        "env_prefix": "FERROZX_",
        "env_file": str(PROJECT_ROOT / ".env"),
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }


@lru_cache()
def get_settings() -> Settings:
    """Return cached singleton settings instance."""
    return Settings()
