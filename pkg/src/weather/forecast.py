"""
AR(1) forecast trajectories with lead-time-dependent noise.

The forecast error at lead l follows ``e_l = -gamma * e_{l-1} + eps_l`` with
``e_0 = 0`` and ``eps_l ~ N(0, sigma(l))``, where
``sigma(l) = max_std_fraction * range * min(sqrt(l / cap_lead), 1)``. The range
of each variable is max - min of the truth series. DNI, DHI and temperature
draw independent noise streams.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.signal import lfilter

from src.errors.agrivoltaic_errors import OutOfRangeError
from src.weather.weather_loader import WeatherSample, samples_from_frame, weather_frame

WEATHER_COLUMNS = ("dni", "dhi", "temperature")

SeedLike = Union[int, np.random.SeedSequence, None]


class ForecastConfig(BaseModel):
    """Forecast noise model."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(default=0.8, ge=0.0, lt=1.0)
    max_std_fraction: float = Field(default=0.0, ge=0.0)
    cap_lead: float = Field(default=336.0, gt=0.0)


@dataclass(frozen=True)
class ForecastTrajectory:
    """Forecast issued at step ``issued_at`` covering steps issued_at..T-1."""
    issued_at: int
    frame: pd.DataFrame

    @property
    def samples(self) -> List[WeatherSample]:
        return samples_from_frame(self.frame)

    def __len__(self) -> int:
        return len(self.frame)


def noise_schedule(cfg: ForecastConfig, value_range: float, max_lead: int) -> np.ndarray:
    """
    Noise standard deviation per lead time.

    Args:
        cfg: Forecast configuration
        value_range: Expected range of the variable
        max_lead: Largest lead in hours

    Returns:
        Array of sigma(l) for l = 0..max_lead
    """
    leads = np.arange(max_lead + 1, dtype=float)
    growth = np.minimum(np.sqrt(leads) / np.sqrt(cfg.cap_lead), 1.0)
    return cfg.max_std_fraction * value_range * growth


def value_ranges(truth: np.ndarray) -> np.ndarray:
    """Per-column max - min of a (T, 3) truth array."""
    if truth.size == 0:
        return np.zeros(truth.shape[1] if truth.ndim == 2 else 0)
    return truth.max(axis=0) - truth.min(axis=0)


def forecast_values(
    truth: np.ndarray,
    t0: int,
    cfg: ForecastConfig,
    rng_seed: SeedLike,
    daylight: Optional[np.ndarray] = None,
    ranges: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Array form of :func:`make_forecast`.

    Args:
        truth: (T, 3) array of dni, dhi, temperature
        t0: Issue step
        cfg: Forecast configuration
        rng_seed: Seed for the noise streams
        daylight: Boolean mask over T; irradiance is zero where False.
            Defaults to ``dni + dhi > 0`` in the truth series
        ranges: Per-variable ranges; computed from ``truth`` when omitted

    Returns:
        (T - t0, 3) forecast array

    Raises:
        OutOfRangeError: If t0 is outside [0, T)
    """
    n_steps = truth.shape[0]
    if not 0 <= t0 < n_steps:
        raise OutOfRangeError(f"forecast issue step {t0} outside [0, {n_steps})")

    window = truth[t0:]
    if cfg.max_std_fraction == 0.0:
        return window.copy()

    if ranges is None:
        ranges = value_ranges(truth)
    if daylight is None:
        daylight = (truth[:, 0] + truth[:, 1]) > 0.0

    horizon = window.shape[0]
    sigma = np.stack([noise_schedule(cfg, float(r), horizon - 1) for r in ranges], axis=1)

    rng = np.random.default_rng(rng_seed)
    innovations = rng.standard_normal((horizon, len(ranges))) * sigma
    innovations[0, :] = 0.0
    errors = lfilter([1.0], [1.0, cfg.gamma], innovations, axis=0)

    forecast = window + errors
    forecast[:, :2] = np.maximum(forecast[:, :2], 0.0)
    forecast[~daylight[t0:], :2] = 0.0
    return forecast


def make_forecast(
    truth: Union[Sequence[WeatherSample], pd.DataFrame],
    t0: int,
    cfg: ForecastConfig,
    rng_seed: SeedLike,
    daylight: Optional[np.ndarray] = None
) -> ForecastTrajectory:
    """
    Issue a forecast at step t0 for the rest of the season.

    Args:
        truth: Measured weather, as samples or a weather frame
        t0: Issue step (0 <= t0 < T)
        cfg: Forecast configuration
        rng_seed: Seed; the same seed gives the same trajectory
        daylight: Optional daylight mask over T

    Returns:
        ForecastTrajectory whose first row equals the measurement at t0

    Raises:
        OutOfRangeError: If t0 is out of range
    """
    frame = truth if isinstance(truth, pd.DataFrame) else weather_frame(truth)
    values = frame[list(WEATHER_COLUMNS)].to_numpy(dtype=float)
    forecast = forecast_values(values, t0, cfg, rng_seed, daylight=daylight)
    return ForecastTrajectory(
        issued_at=t0,
        frame=pd.DataFrame(forecast, columns=list(WEATHER_COLUMNS), index=frame.index[t0:]),
    )
