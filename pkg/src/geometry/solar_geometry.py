"""
Sun position, angle of incidence and the sun-tracking trajectory.

Angle conventions (all public angles in degrees):
- Solar and panel azimuth are measured from true south, east of south positive.
  Data sources that report azimuth clockwise from north convert with
  ``azimuth_south = 180 - azimuth_north``.
- Altitude is measured up from the horizon; tilt is the collector angle from
  the horizontal plane.

Sun position uses the low-precision Astronomical Almanac ephemeris (mean
longitude and anomaly, ecliptic longitude, obliquity, Greenwich mean sidereal
time). It is accurate to about 0.01 degrees over 1950-2100 and returns the
geometric altitude, without refraction.
"""

import math
from dataclasses import dataclass, replace
from datetime import datetime
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors.agrivoltaic_errors import OutOfRangeError

SUPPORTED_YEARS = (1950, 2100)

TimestampLike = Union[datetime, pd.Timestamp, str]


class Site(BaseModel):
    """Geographic site; naive timestamps are local standard time at this offset."""

    model_config = ConfigDict(frozen=True)

    latitude: float = Field(ge=-90.0, le=90.0)
    longitude: float = Field(ge=-180.0, le=180.0)
    timezone_offset: float = Field(ge=-12.0, le=14.0)
    name: str = ""


class OrientationLimits(BaseModel):
    """Physical design limits of the tracker."""

    model_config = ConfigDict(frozen=True)

    azimuth_min: float = -180.0
    azimuth_max: float = 180.0
    tilt_min: float = 0.0
    tilt_max: float = 90.0

    @model_validator(mode="after")
    def _check_order(self) -> "OrientationLimits":
        if self.azimuth_min > self.azimuth_max:
            raise ValueError("azimuth_min must not exceed azimuth_max")
        if self.tilt_min > self.tilt_max:
            raise ValueError("tilt_min must not exceed tilt_max")
        return self


class ParkOrientation(BaseModel):
    """Orientation the tracker holds while the sun is down."""

    model_config = ConfigDict(frozen=True)

    azimuth: float
    tilt: float


@dataclass(frozen=True)
class SolarPosition:
    """Sun direction in degrees (azimuth from south, east positive)."""
    azimuth_s: float
    altitude_s: float

    @property
    def is_daylight(self) -> bool:
        return self.altitude_s > 0.0


@dataclass(frozen=True)
class PanelOrientation:
    """Panel normal orientation in degrees."""
    azimuth_pv: float
    tilt_pv: float
    clamped: bool = False
    parked: bool = False


def _to_utc_index(timestamps, site: Site) -> pd.DatetimeIndex:
    """Convert civil timestamps to a naive UTC index."""
    index = pd.DatetimeIndex(pd.to_datetime(timestamps))
    if index.tz is not None:
        index = index.tz_convert("UTC").tz_localize(None)
    else:
        index = index - pd.to_timedelta(site.timezone_offset, unit="h")

    if len(index) and (index.year.min() < SUPPORTED_YEARS[0] or index.year.max() > SUPPORTED_YEARS[1]):
        raise OutOfRangeError(
            f"timestamps must fall within {SUPPORTED_YEARS[0]}-{SUPPORTED_YEARS[1]}, "
            f"got {index.min()} .. {index.max()}"
        )
    return index


def _ephemeris(utc: pd.DatetimeIndex, latitude: float, longitude: float) -> tuple[np.ndarray, np.ndarray]:
    """Return (azimuth_south_east_positive, altitude) in degrees for UTC instants."""
    jd = np.asarray(utc.to_julian_date(), dtype=float)
    n = jd - 2451545.0
    hour_utc = np.asarray(utc.hour + utc.minute / 60.0 + utc.second / 3600.0, dtype=float)

    mean_longitude = np.mod(280.460 + 0.9856474 * n, 360.0)
    mean_anomaly = np.radians(np.mod(357.528 + 0.9856003 * n, 360.0))
    ecliptic_longitude = np.radians(np.mod(
        mean_longitude + 1.915 * np.sin(mean_anomaly) + 0.020 * np.sin(2.0 * mean_anomaly), 360.0
    ))
    obliquity = np.radians(23.439 - 0.0000004 * n)

    right_ascension = np.arctan2(np.cos(obliquity) * np.sin(ecliptic_longitude), np.cos(ecliptic_longitude))
    declination = np.arcsin(np.sin(obliquity) * np.sin(ecliptic_longitude))

    gmst_hours = np.mod(6.697375 + 0.0657098242 * n + hour_utc, 24.0)
    local_sidereal = np.radians(np.mod(gmst_hours * 15.0 + longitude, 360.0))
    hour_angle = local_sidereal - right_ascension
    hour_angle = np.mod(hour_angle + np.pi, 2.0 * np.pi) - np.pi

    lat = np.radians(latitude)
    sin_alt = np.sin(declination) * np.sin(lat) + np.cos(declination) * np.cos(lat) * np.cos(hour_angle)
    altitude = np.arcsin(np.clip(sin_alt, -1.0, 1.0))

    # Azimuth from south, positive toward west, then flipped to east-positive
    azimuth_west = np.arctan2(
        np.sin(hour_angle) * np.cos(declination),
        np.sin(lat) * np.cos(hour_angle) * np.cos(declination) - np.cos(lat) * np.sin(declination)
    )
    return -np.degrees(azimuth_west), np.degrees(altitude)


def sun_position(site: Site, timestamp: TimestampLike) -> SolarPosition:
    """
    Compute the sun position for one civil timestamp.

    Args:
        site: Observer site
        timestamp: Naive local standard time, or timezone-aware

    Returns:
        SolarPosition with south-referenced, east-positive azimuth

    Raises:
        OutOfRangeError: If the timestamp year is unsupported
    """
    utc = _to_utc_index([timestamp], site)
    azimuth, altitude = _ephemeris(utc, site.latitude, site.longitude)
    return SolarPosition(azimuth_s=float(azimuth[0]), altitude_s=float(altitude[0]))


def sun_positions(site: Site, timestamps) -> pd.DataFrame:
    """
    Compute sun positions for a sequence of civil timestamps.

    Args:
        site: Observer site
        timestamps: Sequence or index of timestamps

    Returns:
        DataFrame indexed like ``timestamps`` with azimuth_s and altitude_s columns
    """
    index = pd.DatetimeIndex(pd.to_datetime(timestamps))
    utc = _to_utc_index(index, site)
    azimuth, altitude = _ephemeris(utc, site.latitude, site.longitude)
    return pd.DataFrame({"azimuth_s": azimuth, "altitude_s": altitude}, index=index)


def incidence_cosine(sun: SolarPosition, panel: PanelOrientation) -> float:
    """
    Cosine of the angle between the sun's rays and the panel normal.

    Args:
        sun: Sun position
        panel: Panel orientation

    Returns:
        cos(theta) in [-1, 1]
    """
    beta = math.radians(sun.altitude_s)
    tilt = math.radians(panel.tilt_pv)
    value = (
        math.cos(beta) * math.cos(math.radians(sun.azimuth_s - panel.azimuth_pv)) * math.sin(tilt)
        + math.sin(beta) * math.cos(tilt)
    )
    return min(1.0, max(-1.0, value))


def clamp_orientation(panel: PanelOrientation, limits: OrientationLimits) -> PanelOrientation:
    """Clamp an orientation into the design limits, flagging any change."""
    azimuth = min(max(panel.azimuth_pv, limits.azimuth_min), limits.azimuth_max)
    tilt = min(max(panel.tilt_pv, limits.tilt_min), limits.tilt_max)
    clamped = panel.clamped or azimuth != panel.azimuth_pv or tilt != panel.tilt_pv
    return replace(panel, azimuth_pv=azimuth, tilt_pv=tilt, clamped=clamped)


def park_orientation(park: ParkOrientation) -> PanelOrientation:
    """Night orientation sentinel."""
    return PanelOrientation(azimuth_pv=park.azimuth, tilt_pv=park.tilt, parked=True)


def sun_tracking_orientation(
    sun: SolarPosition,
    limits: Optional[OrientationLimits] = None,
    park: Optional[ParkOrientation] = None
) -> PanelOrientation:
    """
    Orientation that points the panel normal at the sun.

    Args:
        sun: Sun position
        limits: Design limits; the result is clamped and flagged when given
        park: Night orientation returned when the sun is down

    Returns:
        PanelOrientation with tilt = 90 - altitude and azimuth = solar azimuth;
        a parked orientation (``parked=True``) at night
    """
    if not sun.is_daylight:
        if park is None:
            return PanelOrientation(azimuth_pv=0.0, tilt_pv=0.0, parked=True)
        return park_orientation(park)

    panel = PanelOrientation(azimuth_pv=sun.azimuth_s, tilt_pv=90.0 - sun.altitude_s)
    if limits is None:
        return panel
    return clamp_orientation(panel, limits)
