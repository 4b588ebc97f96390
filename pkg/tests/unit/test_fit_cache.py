"""
Tests for the season shading fit cache.
"""

import math

import pandas as pd
import pytest

from src.errors.agrivoltaic_errors import DataError, ShadingFitError
from src.geometry.fit_cache import FIT_COLUMNS, ShadingFitCache, compute_fits, hourly_r_squared
from src.geometry.shading import fit_affine_sf, shading_factor
from src.geometry.solar_geometry import (
    OrientationLimits,
    PanelOrientation,
    SolarPosition,
    sun_positions,
    sun_tracking_orientation,
)
from src.reporting.result_writer import ResultWriter


@pytest.fixture
def day(site, park):
    timestamps = pd.date_range("2023-07-01", periods=24, freq="h")
    frame = sun_positions(site, timestamps)
    suns = [SolarPosition(float(a), float(b)) for a, b in zip(frame["azimuth_s"], frame["altitude_s"])]
    trackings = [sun_tracking_orientation(sun, OrientationLimits(), park) for sun in suns]
    return timestamps, suns, trackings


@pytest.fixture
def fits(layout, day):
    _, suns, trackings = day
    return compute_fits(layout, suns, trackings, OrientationLimits(), step=2.0)


class TestComputeFits:
    """Season fits."""

    def test_one_fit_per_daylight_step(self, fits, day):
        _, suns, _ = day
        daylight = [t for t, sun in enumerate(suns) if sun.altitude_s > 0.0]
        assert [fit.t for fit in fits] == daylight
        assert len(fits) == len(daylight)
        assert 0 not in fits
        assert fits.get(0) is None

    def test_threads_give_identical_fits(self, layout, day, fits):
        _, suns, trackings = day
        threaded = compute_fits(layout, suns, trackings, OrientationLimits(), jobs=3, step=2.0)
        pd.testing.assert_frame_equal(threaded.to_frame(), fits.to_frame())

    def test_mismatched_inputs_raise(self, layout, day):
        _, suns, trackings = day
        with pytest.raises(ShadingFitError):
            compute_fits(layout, suns, trackings[:-1], OrientationLimits())

    def test_summary(self, fits):
        summary = fits.summary()
        assert summary["n_fits"] == len(fits)
        assert 0.0 < summary["mean_r_squared"] <= 1.0
        assert summary["worst_residual"] >= 0.0

    def test_empty_summary(self):
        summary = ShadingFitCache([]).summary()
        assert summary["n_fits"] == 0
        assert summary["worst_residual"] == 0.0

    def test_clamped_tilt_fits_around_unclamped_tracking(self, layout):
        sun = SolarPosition(azimuth_s=70.0, altitude_s=20.0)
        limits = OrientationLimits(tilt_max=60.0)
        tracking = sun_tracking_orientation(sun, limits)
        assert tracking.clamped and tracking.tilt_pv == 60.0

        fit = compute_fits(layout, [sun], [tracking], limits).get(0)
        direct = fit_affine_sf(layout, sun, PanelOrientation(70.0, 70.0), limits)
        assert fit.n_points == 61
        assert (fit.g1, fit.g2) == (direct.g1, direct.g2)

        # x = cos(tilt - (90 - altitude)) is what the optimizer feeds the fit
        for tilt in (20.0, 40.0, 60.0):
            exact = shading_factor(layout, sun, PanelOrientation(70.0, tilt))
            x = math.cos(math.radians(tilt - 70.0))
            assert abs(fit.g1 * x + fit.g2 - exact) <= fit.max_residual + 1e-12


class TestFitFiles:
    """CSV output and reload."""

    def test_reload_written_fits(self, fits, tmp_path):
        path = ResultWriter(tmp_path).write_csv("shading_fits", fits.to_frame())
        loaded = ShadingFitCache.load_csv(path)
        assert len(loaded) == len(fits)
        for original, reread in zip(fits, loaded):
            assert reread.t == original.t
            assert reread.g1 == pytest.approx(original.g1, rel=1e-9, abs=1e-12)
            assert reread.g2 == pytest.approx(original.g2, rel=1e-9, abs=1e-12)

    def test_rewrite_is_byte_identical(self, fits, tmp_path):
        first = ResultWriter(tmp_path / "a").write_csv("shading_fits", fits.to_frame())
        second = ResultWriter(tmp_path / "b").write_csv("shading_fits", fits.to_frame())
        assert first.read_bytes() == second.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            ShadingFitCache.load_csv(tmp_path / "fits.csv")

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "fits.csv"
        pd.DataFrame({"t": [1], "g1": [0.1]}).to_csv(path, index=False)
        with pytest.raises(DataError, match="g2"):
            ShadingFitCache.load_csv(path)

    def test_columns(self, fits):
        assert list(fits.to_frame().columns) == FIT_COLUMNS


class TestHourlyRSquared:
    """Hour-of-day aggregation."""

    def test_hours_cover_daylight(self, fits, day):
        timestamps, _, _ = day
        hourly = hourly_r_squared(fits, timestamps)
        assert list(hourly.columns) == ["hour", "mean_r_squared", "min_r_squared", "n_fits"]
        assert hourly["n_fits"].sum() == len(fits)
        assert set(hourly["hour"]) == {timestamps[fit.t].hour for fit in fits}
        assert (hourly["min_r_squared"] <= hourly["mean_r_squared"] + 1e-12).all()

    def test_midday_is_near_one(self, fits, day):
        timestamps, _, _ = day
        hourly = hourly_r_squared(fits, timestamps).set_index("hour")
        assert hourly.loc[12, "mean_r_squared"] >= 0.999
