"""
EPIC crop growth: heat units, temperature stress, leaf area and biomass.

Only temperature stress limits growth and the leaf-decline phase is not
modelled, so LAI never falls. Daily PAR enters in Wh/m^2 and biomass
accumulates as ``BIOMASS_CONVERSION * BE * PAR_crop * REG``.

Phenology (HUI, REG, HUF, LAI) depends on temperature alone; only biomass
depends on the light reaching the field.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors.agrivoltaic_errors import UndefinedLERError

BIOMASS_CONVERSION = 0.001
LIGHT_EXTINCTION = 0.65
LAI_SHAPE = 5.0
GROWTH_HALT_FACTOR = 1.5


class CropParams(BaseModel):
    """Crop-specific EPIC parameters."""

    model_config = ConfigDict(frozen=True)

    name: str = ""
    t_base: float
    t_opt: float
    phu: float = Field(gt=0.0)
    lai_max: float = Field(gt=0.0)
    ah1: float
    ah2: float
    be: float = Field(gt=0.0)
    hi: float = Field(gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_temperatures(self) -> "CropParams":
        if self.t_opt <= self.t_base:
            raise ValueError("t_opt must exceed t_base")
        return self


@dataclass(frozen=True)
class CropState:
    """Crop state at the end of day ``day`` (day 0 is planting)."""
    day: int
    hui: float
    reg: float
    huf: float
    lai: float
    biomass: float

    @classmethod
    def initial(cls) -> "CropState":
        return cls(day=0, hui=0.0, reg=0.0, huf=0.0, lai=0.0, biomass=0.0)


@dataclass(frozen=True)
class DailyClimate:
    """Daily temperatures; t_avg stands in for the soil surface temperature."""
    t_min: float
    t_max: float
    t_avg: float

    def __post_init__(self):
        if not self.t_min <= self.t_avg <= self.t_max:
            raise ValueError(f"expected t_min <= t_avg <= t_max, got {self.t_min}, {self.t_avg}, {self.t_max}")


def daily_climate(hourly_temperatures: Sequence[float]) -> DailyClimate:
    """Min, max and mean of a day's hourly temperatures."""
    values = [float(v) for v in hourly_temperatures]
    if not values:
        raise ValueError("no hourly temperatures for the day")
    t_min, t_max = min(values), max(values)
    t_avg = min(t_max, max(t_min, math.fsum(values) / len(values)))
    return DailyClimate(t_min=t_min, t_max=t_max, t_avg=t_avg)


def heat_unit(climate: DailyClimate, params: CropParams) -> float:
    """Daily heat units above the base temperature."""
    return max(0.0, (climate.t_min + climate.t_max) / 2.0 - params.t_base)


def temperature_stress(climate: DailyClimate, params: CropParams) -> float:
    """
    Temperature stress factor REG in [0, 1].

    Growth stops at or below the base temperature and above
    ``GROWTH_HALT_FACTOR * t_opt``.
    """
    t_g = climate.t_avg
    if t_g <= params.t_base or t_g > GROWTH_HALT_FACTOR * params.t_opt:
        return 0.0
    value = math.sin(0.5 * math.pi * (t_g - params.t_base) / (params.t_opt - params.t_base))
    return min(1.0, max(0.0, value))


def heat_unit_factor(hui: float, params: CropParams) -> float:
    """Leaf development curve HUF(HUI)."""
    if hui <= 0.0:
        return 0.0
    return hui / (hui + math.exp(params.ah1 - params.ah2 * hui))


def interception_fraction(lai: float) -> float:
    """Fraction of field PAR intercepted by a canopy with this LAI."""
    return 1.0 - math.exp(-LIGHT_EXTINCTION * lai)


def phenology_step(state: CropState, climate: DailyClimate, params: CropParams) -> Tuple[float, float, float, float]:
    """
    Advance the temperature-driven part of the state by one day.

    Returns:
        (hui, reg, huf, lai) at the end of the day
    """
    hui = state.hui + heat_unit(climate, params) / params.phu
    reg = temperature_stress(climate, params)
    huf = heat_unit_factor(hui, params)
    delta_lai = (
        (huf - state.huf) * params.lai_max
        * (1.0 - math.exp(LAI_SHAPE * (state.lai - params.lai_max)))
        * math.sqrt(reg)
    )
    return hui, reg, huf, state.lai + max(0.0, delta_lai)


def advance_day(
    state: CropState,
    climate: DailyClimate,
    par_field_day: Sequence[float],
    params: CropParams,
    dt: float = 1.0
) -> CropState:
    """
    Advance the crop state by one day.

    Interception uses the LAI at the end of the previous day.

    Args:
        state: State at the end of the previous day
        climate: The day's climate
        par_field_day: Hourly PAR reaching the field (W/m^2)
        params: Crop parameters
        dt: Step length in hours

    Returns:
        State at the end of the day
    """
    hui, reg, huf, lai = phenology_step(state, climate, params)
    par_crop = math.fsum(float(p) for p in par_field_day) * dt * interception_fraction(state.lai)
    biomass = state.biomass + BIOMASS_CONVERSION * params.be * par_crop * reg
    return replace(state, day=state.day + 1, hui=hui, reg=reg, huf=huf, lai=lai, biomass=biomass)


def phenology_schedule(
    state: CropState,
    climates: Sequence[DailyClimate],
    params: CropParams
) -> pd.DataFrame:
    """
    Decision-independent crop schedule for the days ahead.

    Args:
        state: State at the end of the last completed day
        climates: Climate of each remaining day, in order
        params: Crop parameters

    Returns:
        DataFrame with one row per day: day, reg, lai_used (LAI at the end of
        the previous day) and interception
    """
    days, regs, lais, interceptions = [], [], [], []
    current = state
    for climate in climates:
        hui, reg, huf, lai = phenology_step(current, climate, params)
        days.append(current.day + 1)
        regs.append(reg)
        lais.append(current.lai)
        interceptions.append(interception_fraction(current.lai))
        current = replace(current, day=current.day + 1, hui=hui, reg=reg, huf=huf, lai=lai)

    return pd.DataFrame({
        "day": np.asarray(days, dtype=int),
        "reg": np.asarray(regs, dtype=float),
        "lai_used": np.asarray(lais, dtype=float),
        "interception": np.asarray(interceptions, dtype=float),
    })


def simulate_season(
    climates: Sequence[DailyClimate],
    par_field_by_day: Sequence[Sequence[float]],
    params: CropParams,
    dt: float = 1.0,
    initial: Optional[CropState] = None
) -> List[CropState]:
    """
    Run the crop model over a season.

    Returns:
        States at the end of each day
    """
    if len(climates) != len(par_field_by_day):
        raise ValueError(f"{len(climates)} climate days but {len(par_field_by_day)} PAR days")
    state = initial or CropState.initial()
    states = []
    for climate, par_day in zip(climates, par_field_by_day):
        state = advance_day(state, climate, par_day, params, dt)
        states.append(state)
    return states


def yield_and_ler(final_state: CropState, params: CropParams, y_crop_only: float) -> Tuple[float, float]:
    """
    Harvested yield and crop land equivalent ratio.

    Returns:
        (yield in t/ha, LER_crop)

    Raises:
        UndefinedLERError: If the crop-only yield is not positive
    """
    if y_crop_only <= 0.0:
        raise UndefinedLERError("crop-only yield is zero; LER_crop is undefined")
    crop_yield = params.hi * final_state.biomass
    return crop_yield, crop_yield / y_crop_only
