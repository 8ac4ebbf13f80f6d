"""
Configuration module for the cubic B-spline signal approximation workbench.
Uses Pydantic settings for validation and environment variable loading.
"""

from functools import lru_cache
import logging

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix BSPLINE_)."""

    model_config = SettingsConfigDict(
        env_prefix="BSPLINE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Environment
    log_level: str = Field(default="INFO")

    # Sampling grid
    default_h: float = Field(default=1.0 / 32.0, gt=0.0)
    interval_a: float = Field(default=0.0)
    interval_b: float = Field(default=2.0)
    grid_tolerance: float = Field(default=1e-9, gt=0.0)

    # Boundary extension
    extension_rule: str = Field(default="quadratic-extrapolate")
    datapath_extension_rule: str = Field(default="zero-pad")

    # Fixed-point datapath
    samples_per_segment: int = Field(default=10, ge=1)
    total_bits: int = Field(default=16)
    frac_bits: int = Field(default=14)
    signed: bool = Field(default=True)

    # Cycle model
    multiply_cycles: int = Field(default=1, ge=1)
    summator_cycles: int = Field(default=1, ge=1)
    shift_cycles: int = Field(default=0, ge=0, le=1)
    horner_multiply_cycles: int = Field(default=1, ge=1)
    horner_add_cycles: int = Field(default=1, ge=1)

    # Error analysis
    probes: int = Field(default=10000, ge=2)
    interior_intervals: int = Field(default=2, ge=0)
    exact_error_threshold: float = Field(default=1e-13, ge=0.0)


class LogConfig:
    """Logging configuration."""

    @staticmethod
    def setup_logging(level: str = "INFO") -> logging.Logger:
        """Set up logging configuration."""
        log_level = getattr(logging, level.upper(), logging.INFO)

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # stderr, so CSV written to stdout stays parseable
        console_handler = logging.StreamHandler()
        console_handler.setLevel(log_level)
        console_handler.setFormatter(formatter)

        root_logger = logging.getLogger()
        root_logger.setLevel(log_level)
        for handler in list(root_logger.handlers):
            if getattr(handler, "_bspline_console", False):
                root_logger.removeHandler(handler)
        console_handler._bspline_console = True
        root_logger.addHandler(console_handler)

        # Suppress noisy loggers
        logging.getLogger("matplotlib").setLevel(logging.WARNING)
        logging.getLogger("PIL").setLevel(logging.WARNING)

        return root_logger


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the specified name."""
    return logging.getLogger(name)
