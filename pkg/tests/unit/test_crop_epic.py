"""
Tests for the daily EPIC crop model.
"""

import math

import pytest

from src.crop.crop_epic import (
    CropParams,
    CropState,
    DailyClimate,
    advance_day,
    daily_climate,
    heat_unit,
    heat_unit_factor,
    interception_fraction,
    phenology_schedule,
    simulate_season,
    temperature_stress,
    yield_and_ler,
)
from src.errors.agrivoltaic_errors import UndefinedLERError


def reference_season(climates, par_days, p):
    """Plain re-implementation of the daily update, used as an oracle."""
    hui = huf = lai = biomass = 0.0
    out = []
    for (t_min, t_max, t_avg), par in zip(climates, par_days):
        hui += max(0.0, (t_min + t_max) / 2.0 - p["t_base"]) / p["phu"]
        if t_avg <= p["t_base"] or t_avg > 1.5 * p["t_opt"]:
            reg = 0.0
        else:
            reg = min(1.0, max(0.0, math.sin(math.pi / 2.0 * (t_avg - p["t_base"]) / (p["t_opt"] - p["t_base"]))))
        new_huf = hui / (hui + math.exp(p["ah1"] - p["ah2"] * hui)) if hui > 0 else 0.0
        d_lai = (new_huf - huf) * p["lai_max"] * (1.0 - math.exp(5.0 * (lai - p["lai_max"]))) * math.sqrt(reg)
        biomass += 0.001 * p["be"] * sum(par) * (1.0 - math.exp(-0.65 * lai)) * reg
        lai += max(0.0, d_lai)
        huf = new_huf
        out.append((hui, reg, lai, biomass))
    return out


@pytest.fixture
def warm_days():
    temps = [(14.0, 27.0, 20.5), (15.0, 29.0, 21.0), (13.0, 25.0, 19.0), (16.0, 30.0, 23.0), (12.0, 24.0, 18.0)]
    par = [[0.0] * 6 + [150.0, 300.0, 420.0, 500.0, 520.0, 500.0, 420.0, 300.0, 150.0] + [0.0] * 9] * 5
    return temps, par


class TestDailyFunctions:
    """Heat units, stress and canopy curves."""

    def test_heat_unit(self, crop_params):
        assert heat_unit(DailyClimate(10.0, 20.0, 15.0), crop_params) == pytest.approx(11.0)
        assert heat_unit(DailyClimate(-5.0, 5.0, 0.0), crop_params) == 0.0

    def test_stress_boundaries_are_exact(self, crop_params):
        def reg(t):
            return temperature_stress(DailyClimate(t - 1.0, t + 1.0, t), crop_params)

        assert reg(crop_params.t_base) == 0.0
        assert reg(crop_params.t_opt) == 1.0
        assert reg(1.5 * crop_params.t_opt + 0.01) == 0.0
        assert 0.0 < reg(10.0) < 1.0

    def test_heat_unit_factor(self, crop_params):
        assert heat_unit_factor(0.0, crop_params) == 0.0
        assert 0.0 < heat_unit_factor(0.3, crop_params) < heat_unit_factor(0.6, crop_params) < 1.0

    def test_interception(self):
        assert interception_fraction(0.0) == 0.0
        assert interception_fraction(3.0) == pytest.approx(1.0 - math.exp(-1.95))

    def test_daily_climate(self):
        climate = daily_climate([10.0, 14.0, 22.0, 18.0])
        assert (climate.t_min, climate.t_max, climate.t_avg) == (10.0, 22.0, 16.0)

    def test_daily_climate_needs_values(self):
        with pytest.raises(ValueError):
            daily_climate([])

    def test_climate_ordering_checked(self):
        with pytest.raises(ValueError):
            DailyClimate(t_min=20.0, t_max=10.0, t_avg=15.0)

    def test_params_need_t_opt_above_t_base(self):
        with pytest.raises(ValueError):
            CropParams(t_base=10.0, t_opt=5.0, phu=1000.0, lai_max=3.0, ah1=5.0, ah2=18.0, be=20.0, hi=0.9)


class TestSeason:
    """Multi-day evolution."""

    def test_matches_reference(self, crop_params, warm_days):
        temps, par = warm_days
        climates = [DailyClimate(*t) for t in temps]
        ours = simulate_season(climates, par, crop_params)
        expected = reference_season(temps, par, crop_params.model_dump())
        for state, (hui, reg, lai, biomass) in zip(ours, expected):
            assert state.hui == pytest.approx(hui, rel=1e-9)
            assert state.reg == pytest.approx(reg, rel=1e-9)
            assert state.lai == pytest.approx(lai, rel=1e-9)
            assert state.biomass == pytest.approx(biomass, rel=1e-9, abs=1e-15)
        assert [s.day for s in ours] == [1, 2, 3, 4, 5]

    def test_long_season_bounds(self, crop_params):
        climate = DailyClimate(14.0, 28.0, 21.0)
        par_day = [0.0] * 7 + [400.0] * 10 + [0.0] * 7
        states = simulate_season([climate] * 120, [par_day] * 120, crop_params)
        lais = [s.lai for s in states]
        assert max(lais) <= crop_params.lai_max
        assert max(lais) > 0.5 * crop_params.lai_max
        for before, after in zip(states, states[1:]):
            assert after.biomass >= before.biomass
            assert after.hui >= before.hui

    def test_more_light_gives_more_biomass(self, crop_params):
        climate = DailyClimate(14.0, 28.0, 21.0)
        bright = [[0.0] * 8 + [500.0] * 8 + [0.0] * 8] * 60
        shaded = [[0.0] * 8 + [350.0] * 8 + [0.0] * 8] * 60
        assert (simulate_season([climate] * 60, bright, crop_params)[-1].biomass
                > simulate_season([climate] * 60, shaded, crop_params)[-1].biomass)

    def test_interception_uses_previous_lai(self, crop_params):
        state = CropState(day=3, hui=0.2, reg=1.0, huf=0.05, lai=1.0, biomass=0.5)
        climate = DailyClimate(15.0, 25.0, 20.0)
        after = advance_day(state, climate, [100.0] * 10, crop_params)
        reg = temperature_stress(climate, crop_params)
        expected = 0.5 + 0.001 * crop_params.be * 1000.0 * interception_fraction(1.0) * reg
        assert after.biomass == pytest.approx(expected, rel=1e-12)
        assert after.day == 4

    def test_schedule_matches_simulation(self, crop_params, warm_days):
        temps, par = warm_days
        climates = [DailyClimate(*t) for t in temps]
        states = simulate_season(climates, par, crop_params)
        schedule = phenology_schedule(CropState.initial(), climates, crop_params)
        assert list(schedule["day"]) == [1, 2, 3, 4, 5]
        assert list(schedule["reg"]) == [s.reg for s in states]
        assert list(schedule["lai_used"]) == [0.0] + [s.lai for s in states[:-1]]

    def test_length_mismatch(self, crop_params):
        with pytest.raises(ValueError):
            simulate_season([DailyClimate(10.0, 20.0, 15.0)], [], crop_params)


class TestYield:
    """Harvest and crop LER."""

    def test_yield_and_ler(self, crop_params):
        state = CropState(day=60, hui=1.0, reg=1.0, huf=0.9, lai=2.5, biomass=4.0)
        crop_yield, ler = yield_and_ler(state, crop_params, y_crop_only=4.5)
        assert crop_yield == pytest.approx(3.6)
        assert ler == pytest.approx(0.8)

    def test_zero_baseline(self, crop_params):
        with pytest.raises(UndefinedLERError):
            yield_and_ler(CropState.initial(), crop_params, 0.0)
