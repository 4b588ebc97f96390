"""
Tests for sun position and panel orientation helpers.
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.errors.agrivoltaic_errors import OutOfRangeError
from src.geometry.solar_geometry import (
    OrientationLimits,
    PanelOrientation,
    ParkOrientation,
    SolarPosition,
    clamp_orientation,
    incidence_cosine,
    sun_position,
    sun_positions,
    sun_tracking_orientation,
)


class TestSunPosition:
    """Ephemeris checks at a mid-latitude site."""

    def test_solstice_noon_altitude(self, site):
        times = pd.date_range("2023-06-21 11:00", "2023-06-21 14:00", freq="min")
        altitude = sun_positions(site, times)["altitude_s"]
        assert altitude.max() == pytest.approx(90.0 - site.latitude + 23.44, abs=0.3)

    def test_azimuth_east_in_morning_west_in_afternoon(self, site):
        morning = sun_position(site, pd.Timestamp("2023-07-01 09:00"))
        afternoon = sun_position(site, pd.Timestamp("2023-07-01 16:00"))
        assert morning.azimuth_s > 0.0
        assert afternoon.azimuth_s < 0.0

    def test_night_is_not_daylight(self, site):
        sun = sun_position(site, pd.Timestamp("2023-07-01 01:00"))
        assert sun.altitude_s < 0.0
        assert not sun.is_daylight

    def test_timezone_aware_matches_local_standard_time(self, site):
        naive = sun_position(site, pd.Timestamp("2023-07-01 10:00"))
        aware = sun_position(site, pd.Timestamp("2023-07-01 15:00", tz="UTC"))
        assert aware.altitude_s == pytest.approx(naive.altitude_s, abs=1e-9)
        assert aware.azimuth_s == pytest.approx(naive.azimuth_s, abs=1e-9)

    def test_vectorised_matches_scalar(self, site):
        times = pd.date_range("2023-07-01", periods=24, freq="h")
        frame = sun_positions(site, times)
        for ts, row in frame.iterrows():
            sun = sun_position(site, ts)
            assert row["altitude_s"] == pytest.approx(sun.altitude_s, abs=1e-9)
            assert row["azimuth_s"] == pytest.approx(sun.azimuth_s, abs=1e-9)

    @pytest.mark.parametrize("timestamp", ["1949-12-31 12:00", "2101-01-01 12:00"])
    def test_unsupported_year_raises(self, site, timestamp):
        with pytest.raises(OutOfRangeError):
            sun_position(site, pd.Timestamp(timestamp))

    def test_matches_pvlib(self, site):
        pvlib = pytest.importorskip("pvlib")
        times = pd.date_range("2023-07-01", "2023-08-29 23:00", freq="7h")
        ours = sun_positions(site, times)
        theirs = pvlib.solarposition.get_solarposition(
            times.tz_localize("Etc/GMT+5"), site.latitude, site.longitude, method="nrel_numpy"
        )
        up = ours["altitude_s"].to_numpy() > 5.0
        altitude_error = np.abs(ours["altitude_s"].to_numpy() - theirs["elevation"].to_numpy())
        azimuth_ours = np.mod(180.0 - ours["azimuth_s"].to_numpy(), 360.0)
        azimuth_error = np.abs((azimuth_ours - theirs["azimuth"].to_numpy() + 180.0) % 360.0 - 180.0)
        assert altitude_error[up].max() < 0.1
        assert azimuth_error[up].max() < 0.2


class TestOrientation:
    """Tracking, clamping and incidence."""

    def test_tracking_points_at_the_sun(self):
        sun = SolarPosition(azimuth_s=35.0, altitude_s=40.0)
        panel = sun_tracking_orientation(sun)
        assert panel.tilt_pv == pytest.approx(50.0)
        assert panel.azimuth_pv == pytest.approx(35.0)
        assert incidence_cosine(sun, panel) == pytest.approx(1.0, abs=1e-12)

    def test_incidence_matches_angle_formula(self):
        sun = SolarPosition(azimuth_s=-20.0, altitude_s=30.0)
        panel = PanelOrientation(azimuth_pv=10.0, tilt_pv=25.0)
        beta, tilt, gap = math.radians(30.0), math.radians(25.0), math.radians(-30.0)
        expected = math.cos(beta) * math.cos(gap) * math.sin(tilt) + math.sin(beta) * math.cos(tilt)
        assert incidence_cosine(sun, panel) == pytest.approx(expected, abs=1e-12)

    def test_night_returns_park(self):
        park = ParkOrientation(azimuth=0.0, tilt=10.0)
        panel = sun_tracking_orientation(SolarPosition(azimuth_s=150.0, altitude_s=-5.0), park=park)
        assert panel.parked
        assert (panel.azimuth_pv, panel.tilt_pv) == (0.0, 10.0)

    def test_clamp_flags_changes(self):
        limits = OrientationLimits(azimuth_min=-90.0, azimuth_max=90.0, tilt_min=0.0, tilt_max=60.0)
        panel = clamp_orientation(PanelOrientation(azimuth_pv=100.0, tilt_pv=75.0), limits)
        assert (panel.azimuth_pv, panel.tilt_pv) == (90.0, 60.0)
        assert panel.clamped

        inside = clamp_orientation(PanelOrientation(azimuth_pv=10.0, tilt_pv=30.0), limits)
        assert not inside.clamped

    def test_tracking_is_clamped_into_limits(self):
        limits = OrientationLimits(tilt_min=0.0, tilt_max=60.0)
        panel = sun_tracking_orientation(SolarPosition(azimuth_s=80.0, altitude_s=10.0), limits)
        assert panel.tilt_pv == 60.0
        assert panel.clamped

    def test_limits_must_be_ordered(self):
        with pytest.raises(ValueError):
            OrientationLimits(tilt_min=50.0, tilt_max=10.0)
