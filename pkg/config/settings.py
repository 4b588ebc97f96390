"""
Configuration settings for the Agrivoltaic MPC Tracker.

This module manages logging, output locations, worker counts and numerical
tolerances. Scenario inputs (site, layout, crop, prices, weather) live in the
scenario JSON files, not here.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application configuration settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="AGRIPV_",
        case_sensitive=False
    )

    # Application
    app_name: str = "Agrivoltaic MPC Tracker"
    app_version: str = "1.0.0"
    debug: bool = False

    # Logging & Audit
    log_level: str = "INFO"
    audit_log_path: str = "logs/audit.log"
    enable_step_logging: bool = False  # One event per solved horizon

    # Execution
    default_jobs: int = 1
    output_dir: str = "results"

    # Numerical tolerances
    exactness_tolerance: float = 1e-6  # on 1 - (x^2 + y^2)
    shading_sweep_step_deg: float = 1.0
    monotonicity_tolerance: float = 1e-9

    # CSV output
    csv_schema_version: int = 1
    csv_float_format: str = "%.10g"


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get application settings instance."""
    return settings
