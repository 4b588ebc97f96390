"""
Synthetic clear-sky weather for desk-scale seasons.
"""

from datetime import date
from typing import List, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.geometry.solar_geometry import Site, sun_positions
from src.weather.weather_loader import WeatherSample, samples_from_frame


class TemperatureProfile(BaseModel):
    """Daily sinusoid for ambient temperature."""

    model_config = ConfigDict(frozen=True)

    mean: float = 20.0
    amplitude: float = Field(default=6.0, ge=0.0)
    peak_hour: float = Field(default=15.0, ge=0.0, lt=24.0)
    day_to_day: float = Field(default=2.0, ge=0.0)


class ClearSkyParams(BaseModel):
    """Irradiance shape parameters."""

    model_config = ConfigDict(frozen=True)

    peak_dni: float = Field(default=900.0, ge=0.0)
    peak_dhi: float = Field(default=110.0, ge=0.0)
    optical_depth: float = Field(default=0.18, ge=0.0)
    clearness_variation: float = Field(default=0.15, ge=0.0, le=1.0)


def _daily_clearness(num_days: int, variation: float) -> np.ndarray:
    days = np.arange(num_days, dtype=float)
    return 1.0 - variation * 0.5 * (1.0 + np.sin(2.39 * days + 0.7))


def _daily_temperature_offset(num_days: int, day_to_day: float) -> np.ndarray:
    days = np.arange(num_days, dtype=float)
    return day_to_day * np.sin(1.71 * days + 0.4)


def synthesize_clear_sky(
    site: Site,
    start_day: Union[date, str],
    num_days: int,
    temp_profile: TemperatureProfile = TemperatureProfile(),
    params: ClearSkyParams = ClearSkyParams()
) -> List[WeatherSample]:
    """
    Build a smooth hourly weather series.

    DNI follows ``peak_dni * k_d * exp(-tau * (1/sin(beta) - 1))`` with a
    deterministic daily clearness ``k_d`` in (0, 1]; DHI is
    ``peak_dhi * k_d * sin(beta)``. Both are zero while the sun is down.
    Temperature is ``mean + offset_d + amplitude * cos(2 pi (h - peak_hour) / 24)``.

    Args:
        site: Site the sun position is computed for
        start_day: First local day of the season
        num_days: Number of days (>= 1)
        temp_profile: Temperature sinusoid parameters
        params: Irradiance shape parameters

    Returns:
        24 * num_days hourly samples in local standard time
    """
    if num_days < 1:
        raise ValueError("num_days must be at least 1")

    index = pd.date_range(pd.Timestamp(start_day).normalize(), periods=24 * num_days, freq="h", name="timestamp")
    altitude = sun_positions(site, index)["altitude_s"].to_numpy()
    sin_alt = np.sin(np.radians(altitude))
    daylight = altitude > 0.0

    day_of_step = np.repeat(np.arange(num_days), 24)
    clearness = _daily_clearness(num_days, params.clearness_variation)[day_of_step]

    dni = np.zeros(len(index))
    air_mass_excess = 1.0 / sin_alt[daylight] - 1.0
    dni[daylight] = params.peak_dni * clearness[daylight] * np.exp(-params.optical_depth * air_mass_excess)
    dhi = np.where(daylight, params.peak_dhi * clearness * sin_alt, 0.0)

    hours = index.hour.to_numpy(dtype=float)
    offset = _daily_temperature_offset(num_days, temp_profile.day_to_day)[day_of_step]
    temperature = (
        temp_profile.mean + offset
        + temp_profile.amplitude * np.cos(2.0 * np.pi * (hours - temp_profile.peak_hour) / 24.0)
    )

    frame = pd.DataFrame({"dni": dni, "dhi": dhi, "temperature": temperature}, index=index)
    return samples_from_frame(frame)
