"""
Panel-plane irradiance, power, revenue and deviations from sun tracking.

Deviations are written both in trigonometric form (tilt deviation delta) and
in the linear form over x = cos(delta), y = sin(delta) that the optimizer uses:

    dI_db   = DNI * x - DNI
    dI_diff = b1 * x + b2 * y - b1,  b1 = DHI/2 * cos(90 - beta), b2 = -DHI/2 * sin(90 - beta)
    dP      = A * eta * (dI_db + dI_diff)
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors.agrivoltaic_errors import DataError, NumericalError, UndefinedLERError
from src.geometry.solar_geometry import PanelOrientation, SolarPosition, incidence_cosine
from src.weather.weather_loader import WeatherSample

HOURS_PER_DAY = 24


class PvParams(BaseModel):
    """PV array parameters."""

    model_config = ConfigDict(frozen=True)

    area_total: float = Field(gt=0.0)
    efficiency: float = Field(gt=0.0, le=1.0)
    price_profile: Tuple[float, ...]
    alpha: float = Field(gt=0.0, lt=1.0)

    @field_validator("price_profile")
    @classmethod
    def _check_prices(cls, value):
        if len(value) != HOURS_PER_DAY:
            raise ValueError(f"price_profile needs {HOURS_PER_DAY} hourly values, got {len(value)}")
        if any(price < 0.0 for price in value):
            raise ValueError("prices must be non-negative")
        return value


def panel_irradiance(weather: WeatherSample, sun: SolarPosition, panel: PanelOrientation) -> Tuple[float, float]:
    """
    Direct and diffuse irradiance on the panel plane.

    Returns:
        (i_db, i_diff) in W/m^2; back-incidence contributes no direct beam
    """
    i_db = weather.dni * max(0.0, incidence_cosine(sun, panel))
    i_diff = weather.dhi * (1.0 + math.cos(math.radians(panel.tilt_pv))) / 2.0
    return i_db, i_diff


def power(params: PvParams, i_db: float, i_diff: float) -> float:
    """Array output in W."""
    return params.area_total * params.efficiency * (i_db + i_diff)


def price_series(params: PvParams, timestamps: pd.DatetimeIndex) -> np.ndarray:
    """Price per step from the hour-of-day profile."""
    return np.asarray(params.price_profile)[np.asarray(timestamps.hour)]


def revenue(
    powers: Sequence[float],
    params: PvParams,
    dt: float = 1.0,
    hours: Optional[Sequence[int]] = None
) -> float:
    """
    Money earned over a power series.

    Args:
        powers: Power per step in W
        params: PV parameters with the price profile
        dt: Step length in hours
        hours: Hour of day of each step; the series is taken to start at
            hour 0 when omitted

    Returns:
        sum_t price^t * P^t * dt

    Raises:
        DataError: If hours and powers differ in length
    """
    powers = np.asarray(powers, dtype=float)
    if hours is None:
        hours = np.arange(powers.size) % HOURS_PER_DAY
    hours = np.asarray(hours, dtype=int)
    if hours.size != powers.size:
        raise DataError(f"{powers.size} power samples but {hours.size} hour stamps")
    prices = np.asarray(params.price_profile)[hours]
    return float(np.sum(prices * powers) * dt)


def deviations(
    weather: WeatherSample,
    sun: SolarPosition,
    x: float,
    y: float,
    params: PvParams
) -> Tuple[float, float, float]:
    """
    Linear deviations from sun tracking at (x, y) = (cos delta, sin delta).

    Returns:
        (d_i_db, d_i_diff, d_power)

    Raises:
        NumericalError: If (x, y) lies outside the unit disk
    """
    if x * x + y * y > 1.0 + 1e-9:
        raise NumericalError(f"({x}, {y}) lies outside the unit disk")
    zenith = math.radians(90.0 - sun.altitude_s)
    b1 = 0.5 * weather.dhi * math.cos(zenith)
    b2 = -0.5 * weather.dhi * math.sin(zenith)

    d_i_db = weather.dni * x - weather.dni
    d_i_diff = b1 * x + b2 * y - b1
    return d_i_db, d_i_diff, params.area_total * params.efficiency * (d_i_db + d_i_diff)


def deviations_trig(
    weather: WeatherSample,
    sun: SolarPosition,
    delta_tilt: float,
    params: PvParams
) -> Tuple[float, float, float]:
    """
    Trigonometric deviations for a tilt change delta_tilt (degrees) from tracking.

    Returns:
        (d_i_db, d_i_diff, d_power)
    """
    delta = math.radians(delta_tilt)
    tracking_tilt = math.radians(90.0 - sun.altitude_s)
    d_i_db = weather.dni * (math.cos(delta) - 1.0)
    d_i_diff = 0.5 * weather.dhi * (math.cos(tracking_tilt + delta) - math.cos(tracking_tilt))
    return d_i_db, d_i_diff, params.area_total * params.efficiency * (d_i_db + d_i_diff)


def ler_pv(
    delta_powers: Sequence[float],
    tracking_powers: Sequence[float],
    params: PvParams,
    dt: float = 1.0,
    hours: Optional[Sequence[int]] = None
) -> float:
    """
    PV land equivalent ratio against sun tracking.

    Raises:
        UndefinedLERError: If the tracking revenue is zero
    """
    tracking = np.asarray(tracking_powers, dtype=float)
    baseline = revenue(tracking, params, dt, hours)
    if baseline <= 0.0:
        raise UndefinedLERError("sun-tracking revenue is zero; LER_pv is undefined")
    return revenue(tracking + np.asarray(delta_powers, dtype=float), params, dt, hours) / baseline
