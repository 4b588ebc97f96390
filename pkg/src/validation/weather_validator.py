"""
Weather frame validation with column, range and cadence checks.

All hourly weather must be validated before it drives a season: required
columns present, no missing values, non-negative irradiance, strictly
increasing timestamps on an exact hourly cadence.
"""

from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd

ValidationResult = Tuple[bool, str, Optional[int]]


class WeatherFrameValidator:
    """
    Validates a weather DataFrame.

    Each check returns (is_valid, error_message, offending_row) where the row
    is the 1-based data row in the source file, or None.
    """

    def __init__(self, cadence: pd.Timedelta = pd.Timedelta(hours=1)):
        """
        Initialize validator.

        Args:
            cadence: Required spacing between consecutive timestamps
        """
        self.cadence = cadence

    def validate_columns(self, frame: pd.DataFrame, required: Iterable[str]) -> ValidationResult:
        """Check that every required column is present."""
        missing = [column for column in required if column not in frame.columns]
        if missing:
            return False, f"missing required column(s): {', '.join(missing)}", None
        return True, "", None

    def validate_no_missing(self, frame: pd.DataFrame, columns: Iterable[str]) -> ValidationResult:
        """Check that the given columns contain no NaN."""
        for column in columns:
            values = pd.to_numeric(frame[column], errors="coerce")
            bad = np.flatnonzero(values.isna().to_numpy())
            if bad.size:
                return False, f"column '{column}' has a missing or non-numeric value", int(bad[0]) + 1
        return True, "", None

    def validate_non_negative(self, frame: pd.DataFrame, columns: Iterable[str]) -> ValidationResult:
        """Check that irradiance columns are non-negative."""
        for column in columns:
            bad = np.flatnonzero(frame[column].to_numpy(dtype=float) < 0.0)
            if bad.size:
                value = frame[column].iloc[bad[0]]
                return False, f"negative irradiance {value} in column '{column}'", int(bad[0]) + 1
        return True, "", None

    def validate_timestamps(self, timestamps: pd.DatetimeIndex) -> ValidationResult:
        """Check for duplicates, ordering and gaps in the timestamp sequence."""
        if timestamps.hasnans:
            bad = np.flatnonzero(timestamps.isna())
            return False, "unparseable timestamp", int(bad[0]) + 1

        duplicated = np.flatnonzero(timestamps.duplicated())
        if duplicated.size:
            return False, f"duplicated timestamp {timestamps[duplicated[0]]}", int(duplicated[0]) + 1

        steps = np.diff(timestamps.asi8)
        backwards = np.flatnonzero(steps <= 0)
        if backwards.size:
            row = int(backwards[0]) + 2
            return False, f"non-monotonic timestamp {timestamps[row - 1]}", row

        gaps = np.flatnonzero(steps != self.cadence.value)
        if gaps.size:
            row = int(gaps[0]) + 2
            return False, f"gap or off-cadence step before timestamp {timestamps[row - 1]}", row

        return True, "", None


# Global validator instance
_weather_validator: Optional[WeatherFrameValidator] = None


def get_weather_validator() -> WeatherFrameValidator:
    """
    Get or create the global weather validator.

    Returns:
        WeatherFrameValidator instance
    """
    global _weather_validator
    if _weather_validator is None:
        _weather_validator = WeatherFrameValidator()
    return _weather_validator
