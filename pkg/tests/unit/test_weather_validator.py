"""
Tests for weather frame checks.
"""

import pandas as pd
import pytest

from src.validation.weather_validator import WeatherFrameValidator, get_weather_validator


@pytest.fixture
def validator():
    return WeatherFrameValidator()


@pytest.fixture
def frame():
    return pd.DataFrame({"dni": [0.0, 500.0, 700.0], "dhi": [0.0, 60.0, 80.0], "temperature": [15.0, 20.0, 24.0]})


def test_columns(validator, frame):
    assert validator.validate_columns(frame, ["dni", "dhi"]) == (True, "", None)
    ok, message, row = validator.validate_columns(frame, ["dni", "ghi"])
    assert not ok and "ghi" in message and row is None


def test_missing_value_names_row(validator, frame):
    frame.loc[1, "dhi"] = None
    ok, message, row = validator.validate_no_missing(frame, ["dni", "dhi"])
    assert not ok
    assert "dhi" in message
    assert row == 2


def test_non_numeric_counts_as_missing(validator):
    frame = pd.DataFrame({"dni": ["1", "n/a"]})
    assert validator.validate_no_missing(frame, ["dni"])[2] == 2


def test_negative_irradiance(validator, frame):
    frame.loc[2, "dni"] = -1.0
    ok, message, row = validator.validate_non_negative(frame, ["dni", "dhi"])
    assert not ok and row == 3 and "-1.0" in message


def test_hourly_sequence_is_valid(validator):
    assert validator.validate_timestamps(pd.date_range("2023-07-01", periods=5, freq="h"))[0]


@pytest.mark.parametrize("stamps, row, word", [
    (["2023-07-01 00:00", "2023-07-01 01:00", "2023-07-01 01:00"], 3, "duplicated"),
    (["2023-07-01 02:00", "2023-07-01 01:00"], 2, "non-monotonic"),
    (["2023-07-01 00:00", "2023-07-01 01:00", "2023-07-01 03:00"], 3, "gap"),
    (["2023-07-01 00:00", "2023-07-01 00:30"], 2, "gap"),
])
def test_bad_sequences(validator, stamps, row, word):
    ok, message, bad_row = validator.validate_timestamps(pd.DatetimeIndex(pd.to_datetime(stamps)))
    assert not ok
    assert word in message
    assert bad_row == row


def test_singleton():
    assert get_weather_validator() is get_weather_validator()
