"""
Scenario configuration: one JSON file per season experiment.

Parameters the model cannot guess (PAR ratio, prices, layout geometry, crop
parameters, park orientation) are required fields without defaults.
"""

import hashlib
import json
from datetime import date
from pathlib import Path
from typing import List, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.crop.crop_epic import CropParams
from src.errors.agrivoltaic_errors import ConfigError, DataError, get_error_message
from src.geometry.shading import ArrayLayout
from src.geometry.solar_geometry import OrientationLimits, ParkOrientation, Site
from src.optimization.optimizer import ObjectiveConfig
from src.pv.pv_array import PvParams
from src.weather.clear_sky import ClearSkyParams, TemperatureProfile, synthesize_clear_sky
from src.weather.forecast import ForecastConfig
from src.weather.weather_loader import WeatherCsvSchema, WeatherSample, load_weather_csv

HOURS_PER_DAY = 24
MIN_DAYS = 2


class WeatherSource(BaseModel):
    """Where the season's weather comes from."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["synthetic", "file"] = "synthetic"
    path: Optional[str] = None
    csv: WeatherCsvSchema = WeatherCsvSchema()
    start_day: date
    temperature: TemperatureProfile = TemperatureProfile()
    clear_sky: ClearSkyParams = ClearSkyParams()

    @model_validator(mode="after")
    def _check_path(self) -> "WeatherSource":
        if self.kind == "file" and not self.path:
            raise ValueError("weather.path is required when weather.kind is 'file'")
        return self


class BaselineOverrides(BaseModel):
    """Externally supplied single-use baselines."""

    model_config = ConfigDict(frozen=True)

    y_crop_only: float = Field(gt=0.0)
    revenue_tracking: float = Field(gt=0.0)


class ScenarioConfig(BaseModel):
    """A complete season experiment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = ""
    site: Site
    layout: ArrayLayout
    pv: PvParams
    crop: CropParams
    limits: OrientationLimits = OrientationLimits()
    park: ParkOrientation
    weather: WeatherSource
    days: int
    horizon_steps: Optional[int] = None
    dt: float = 1.0
    omega: float = Field(default=0.5, ge=0.0, le=1.0)
    forecast: ForecastConfig = ForecastConfig()
    noise_levels: List[float] = [0.05, 0.10, 0.15]
    seeds: List[int] = [0]
    baselines: Optional[BaselineOverrides] = None
    objective: ObjectiveConfig = ObjectiveConfig()
    solve_cadence: Literal["hourly", "daylight"] = "hourly"

    @field_validator("days")
    @classmethod
    def _check_days(cls, value):
        # No leaf area on day one, so a one-day season has no crop yield
        if value < MIN_DAYS:
            raise ValueError(f"a season needs at least {MIN_DAYS} days, got {value}")
        return value

    @field_validator("dt")
    @classmethod
    def _check_dt(cls, value):
        if value != 1.0:
            raise ValueError("only hourly steps (dt = 1.0) are supported")
        return value

    @field_validator("noise_levels")
    @classmethod
    def _check_noise(cls, value):
        if any(level < 0.0 for level in value):
            raise ValueError("noise levels must be non-negative")
        return value

    @model_validator(mode="after")
    def _check_horizon(self) -> "ScenarioConfig":
        expected = HOURS_PER_DAY * self.days
        if self.horizon_steps is not None and self.horizon_steps != expected:
            raise ValueError(f"horizon_steps must equal 24 * days = {expected}, got {self.horizon_steps}")
        return self

    @property
    def n_steps(self) -> int:
        return HOURS_PER_DAY * self.days

    @property
    def field_area_ha(self) -> float:
        return self.layout.field.area / 10_000.0


def _read_json(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(get_error_message("config_missing", path=str(path)))
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(get_error_message("config_invalid", path=str(path), reason=str(e))) from e


def _validation_reason(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"])
    return f"{location}: {first['msg']}" if location else first["msg"]


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """
    Load and validate a scenario file.

    A string ``crop`` value is read as a crop parameter file, and a relative
    weather path is resolved, both against the scenario file's directory.

    Args:
        path: Scenario JSON path

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigError: If the file is missing, unreadable or invalid
    """
    path = Path(path)
    raw = _read_json(path)

    if isinstance(raw.get("crop"), str):
        raw["crop"] = _read_json((path.parent / raw["crop"]).resolve())

    weather = raw.get("weather")
    if isinstance(weather, dict) and weather.get("path") and not Path(weather["path"]).is_absolute():
        weather["path"] = str((path.parent / weather["path"]).resolve())

    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(get_error_message("config_invalid", path=str(path), reason=_validation_reason(e))) from e


def config_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form; stable under key reordering."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_weather(cfg: ScenarioConfig) -> List[WeatherSample]:
    """
    Weather samples for the scenario's season.

    Raises:
        DataError: If a weather file does not cover the season
    """
    source = cfg.weather
    if source.kind == "synthetic":
        return synthesize_clear_sky(cfg.site, source.start_day, cfg.days, source.temperature, source.clear_sky)

    samples = load_weather_csv(source.path, source.csv, site=cfg.site)
    start = pd.Timestamp(source.start_day)
    first = next((i for i, s in enumerate(samples) if s.timestamp >= start), None)
    if first is None or len(samples) - first < cfg.n_steps:
        available = 0 if first is None else len(samples) - first
        raise DataError(
            f"weather file '{source.path}' has {available} hourly rows from {source.start_day}, "
            f"{cfg.n_steps} needed"
        )
    return samples[first:first + cfg.n_steps]
