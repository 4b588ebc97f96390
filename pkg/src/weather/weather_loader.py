"""
Hourly weather ingestion from NSRDB-style CSV files.

NSRDB exports carry two metadata lines above the header and split the
timestamp into Year/Month/Day/Hour/Minute columns in local standard time; the
column map below covers that layout by default and can be overridden per
scenario for other sources.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors.agrivoltaic_errors import WeatherParseError
from src.geometry.solar_geometry import Site, sun_positions
from src.validation.weather_validator import get_weather_validator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeatherSample:
    """One hourly weather record."""
    timestamp: pd.Timestamp
    dni: float
    dhi: float
    temperature: float


class WeatherCsvSchema(BaseModel):
    """Column map for a weather CSV file."""

    model_config = ConfigDict(frozen=True)

    skip_rows: int = 2
    timestamp: Optional[str] = None
    year: str = "Year"
    month: str = "Month"
    day: str = "Day"
    hour: str = "Hour"
    minute: Optional[str] = "Minute"
    dni: str = "DNI"
    dhi: str = "DHI"
    temperature: str = "Temperature"

    @model_validator(mode="after")
    def _check_skip(self) -> "WeatherCsvSchema":
        if self.skip_rows < 0:
            raise ValueError("skip_rows must be non-negative")
        return self

    def timestamp_columns(self) -> List[str]:
        """Columns that make up the timestamp."""
        if self.timestamp:
            return [self.timestamp]
        parts = [self.year, self.month, self.day, self.hour]
        if self.minute:
            parts.append(self.minute)
        return parts


def _parse_timestamps(frame: pd.DataFrame, schema: WeatherCsvSchema) -> pd.DatetimeIndex:
    if schema.timestamp:
        return pd.DatetimeIndex(pd.to_datetime(frame[schema.timestamp], errors="coerce"))

    parts = pd.DataFrame({
        "year": pd.to_numeric(frame[schema.year], errors="coerce"),
        "month": pd.to_numeric(frame[schema.month], errors="coerce"),
        "day": pd.to_numeric(frame[schema.day], errors="coerce"),
        "hour": pd.to_numeric(frame[schema.hour], errors="coerce"),
    })
    if schema.minute:
        parts["minute"] = pd.to_numeric(frame[schema.minute], errors="coerce")
    return pd.DatetimeIndex(pd.to_datetime(parts, errors="coerce"))


def weather_frame(samples: Sequence[WeatherSample]) -> pd.DataFrame:
    """
    Convert samples to a DataFrame indexed by timestamp.

    Args:
        samples: Weather samples in time order

    Returns:
        DataFrame with dni, dhi and temperature columns
    """
    return pd.DataFrame(
        {
            "dni": [s.dni for s in samples],
            "dhi": [s.dhi for s in samples],
            "temperature": [s.temperature for s in samples],
        },
        index=pd.DatetimeIndex([s.timestamp for s in samples], name="timestamp"),
    )


def samples_from_frame(frame: pd.DataFrame) -> List[WeatherSample]:
    """
    Convert a timestamp-indexed DataFrame back to samples.

    Args:
        frame: DataFrame with dni, dhi and temperature columns

    Returns:
        List of WeatherSample in index order
    """
    return [
        WeatherSample(timestamp=ts, dni=float(dni), dhi=float(dhi), temperature=float(temp))
        for ts, dni, dhi, temp in zip(
            frame.index, frame["dni"].to_numpy(), frame["dhi"].to_numpy(), frame["temperature"].to_numpy()
        )
    ]


def load_weather_csv(
    path: Union[str, Path],
    schema: Optional[WeatherCsvSchema] = None,
    site: Optional[Site] = None
) -> List[WeatherSample]:
    """
    Load hourly weather from a CSV file.

    Args:
        path: CSV file path (UTF-8, comma-delimited, header row)
        schema: Column map; NSRDB layout when omitted
        site: When given, irradiance is forced to zero while the sun is down

    Returns:
        Weather samples in time order

    Raises:
        WeatherParseError: On missing columns, NaN, negative irradiance,
            duplicated, non-monotonic or gapped timestamps
    """
    schema = schema or WeatherCsvSchema()
    path = Path(path)
    if not path.exists():
        raise WeatherParseError(f"weather file '{path}' not found")

    try:
        frame = pd.read_csv(path, skiprows=schema.skip_rows, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise WeatherParseError(f"cannot read '{path}': {e}") from e

    validator = get_weather_validator()
    value_columns = [schema.dni, schema.dhi, schema.temperature]

    valid, error, row = validator.validate_columns(frame, schema.timestamp_columns() + value_columns)
    if not valid:
        raise WeatherParseError(error, row=row)

    valid, error, row = validator.validate_no_missing(frame, value_columns)
    if not valid:
        raise WeatherParseError(error, row=row)

    values = frame[value_columns].apply(pd.to_numeric).astype(float)
    values.columns = ["dni", "dhi", "temperature"]

    valid, error, row = validator.validate_non_negative(values, ["dni", "dhi"])
    if not valid:
        raise WeatherParseError(error, row=row)

    timestamps = _parse_timestamps(frame, schema)
    valid, error, row = validator.validate_timestamps(timestamps)
    if not valid:
        ts = str(timestamps[row - 1]) if row is not None and row - 1 < len(timestamps) else None
        raise WeatherParseError(error, row=row, timestamp=ts)

    values.index = timestamps.rename("timestamp")

    if site is not None:
        night = sun_positions(site, values.index)["altitude_s"].to_numpy() <= 0.0
        forced = int(np.count_nonzero(night & ((values["dni"] > 0) | (values["dhi"] > 0)).to_numpy()))
        values.loc[night, ["dni", "dhi"]] = 0.0
        if forced:
            logger.info("zeroed irradiance on %d night rows of %s", forced, path.name)

    return samples_from_frame(values)
