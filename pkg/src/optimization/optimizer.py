"""
Remaining-horizon tilt optimization over x = cos(delta), y = sin(delta).

Each daylight step t carries a decision (x, y) constrained to the unit disk and
to the slab ``0 <= d1 * x + d2 * y <= 1`` (sin of the panel tilt). The
objective is linear in (x, y) and no constraint couples two steps, so the
horizon problem splits into independent 2-D problems. The analytic backend
solves each one exactly by enumerating its candidate maximizers; the conic
backend solves the joint problem with cvxpy for cross-checking.

Objective modes:
- ``ler``: omega * LER_pv + (1 - omega) * LER_crop
- ``economic``: omega * revenue + (1 - omega) * crop_price * field_area_ha * yield
"""

import math
from dataclasses import dataclass, field, replace
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.crop.crop_epic import (
    BIOMASS_CONVERSION,
    CropParams,
    CropState,
    DailyClimate,
    daily_climate,
    phenology_schedule,
)
from src.errors.agrivoltaic_errors import ProblemBuildError, UndefinedLERError
from src.geometry.fit_cache import ShadingFitCache
from src.geometry.solar_geometry import OrientationLimits
from src.pv.pv_array import PvParams

EXACTNESS_TOLERANCE = 1e-6
SLAB_LOWER = 0.0
SLAB_UPPER = 1.0


class ObjectiveConfig(BaseModel):
    """Objective scalarization and solver backend."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["ler", "economic"] = "ler"
    crop_price: float = Field(default=0.0, ge=0.0)
    backend: Literal["analytic", "conic"] = "analytic"

    @model_validator(mode="after")
    def _check_price(self) -> "ObjectiveConfig":
        if self.mode == "economic" and self.crop_price <= 0.0:
            raise ValueError("economic objective needs a positive crop_price ($/t)")
        return self


@dataclass(frozen=True)
class Baselines:
    """Single-use reference outcomes."""
    y_crop_only: float
    revenue_tracking: float


@dataclass(frozen=True)
class StepCoefficients:
    """Linear-model coefficients of one daylight step."""
    t: int
    b1: float
    b2: float
    c1: float
    c2: float
    d1: float
    d2: float
    dni: float
    dhi: float
    day: int = 0
    tracking_tilt: float = 0.0


@dataclass(frozen=True)
class StepDecision:
    """Solved and recovered decision of one step."""
    t: int
    x: float
    y: float
    exact: bool
    delta_tilt: float = float("nan")
    tilt_clamped: bool = False
    tilt: float = float("nan")
    degenerate: bool = False


@dataclass(frozen=True)
class AccruedTotals:
    """
    Realized quantities before the horizon start.

    Attributes:
        state: Crop state at the end of the day before the current one
        revenue: Revenue earned before t0 ($)
        day_par: Field PAR already received during the current day (W/m^2 summed over steps)
        day_temperatures: Measured temperatures of the current day before t0
    """
    state: CropState = field(default_factory=CropState.initial)
    revenue: float = 0.0
    day_par: float = 0.0
    day_temperatures: tuple = ()


@dataclass(frozen=True)
class HorizonInputs:
    """
    Per-step exogenous data for steps t0..T-1.

    ``sin_zenith`` and ``cos_zenith`` are sin and cos of 90 - altitude; callers
    slice them from season-wide arrays so every horizon sees identical values.
    """
    t0: int
    altitude: np.ndarray
    sin_zenith: np.ndarray
    cos_zenith: np.ndarray
    tracking_tilt: np.ndarray
    prices: np.ndarray
    day_of_step: np.ndarray
    forecast: np.ndarray

    def __len__(self) -> int:
        return int(self.altitude.size)


@dataclass(frozen=True)
class HorizonProblem:
    """
    Linear objective data of a remaining-horizon problem.

    Per-step arrays cover the daylight steps only. ``revenue_weights`` is
    price * dt * A * eta times the revenue scale; ``day_weights`` is the
    per-day crop multiplier HI * 0.001 * BE * REG * interception * dt times the
    yield scale.
    """
    omega: float
    t0: int
    t: np.ndarray
    day: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    dni: np.ndarray
    dhi: np.ndarray
    tracking_tilt: np.ndarray
    revenue_weights: np.ndarray
    day_weights: np.ndarray
    first_day: int
    revenue_x: np.ndarray
    revenue_y: np.ndarray
    revenue_constant: float
    yield_x: np.ndarray
    yield_constant: float
    revenue_scale: float
    yield_scale: float
    baselines: Baselines
    limits: OrientationLimits
    accrued: AccruedTotals

    @property
    def steps(self) -> List[StepCoefficients]:
        return [
            StepCoefficients(
                t=int(self.t[i]), b1=float(self.b1[i]), b2=float(self.b2[i]),
                c1=float(self.c1[i]), c2=float(self.c2[i]),
                d1=float(self.d1[i]), d2=float(self.d2[i]),
                dni=float(self.dni[i]), dhi=float(self.dhi[i]),
                day=int(self.day[i]), tracking_tilt=float(self.tracking_tilt[i]),
            )
            for i in range(self.t.size)
        ]

    @property
    def p(self) -> np.ndarray:
        """Objective coefficient on x per step."""
        crop = self.day_weights[self.day - self.first_day] * self.c1 if self.t.size else np.zeros(0)
        return self.omega * self.revenue_weights * (self.dni + self.b1) + (1.0 - self.omega) * crop

    @property
    def q(self) -> np.ndarray:
        """Objective coefficient on y per step."""
        return self.omega * self.revenue_weights * self.b2

    def predicted_revenue(self, x: np.ndarray, y: np.ndarray) -> float:
        """Season revenue predicted by the linear model ($)."""
        return self.revenue_constant + float(self.revenue_x @ x + self.revenue_y @ y)

    def predicted_yield(self, x: np.ndarray) -> float:
        """Season yield predicted by the linear model (t/ha)."""
        return self.yield_constant + float(self.yield_x @ x)

    def objective(self, x: np.ndarray, y: np.ndarray) -> float:
        return (
            self.omega * self.revenue_scale * self.predicted_revenue(x, y)
            + (1.0 - self.omega) * self.yield_scale * self.predicted_yield(x)
        )


@dataclass(frozen=True)
class HorizonSolution:
    """Solved horizon with linear-model predictions."""
    decisions: List[StepDecision]
    objective: float
    predicted_revenue: float
    predicted_yield: float
    predicted_ler_pv: float
    predicted_ler_crop: float

    @property
    def inexact_steps(self) -> int:
        return sum(1 for d in self.decisions if not d.exact)

    def first(self) -> Optional[StepDecision]:
        return self.decisions[0] if self.decisions else None


def _horizon_climates(inputs: HorizonInputs, accrued: AccruedTotals) -> List[DailyClimate]:
    """Daily climates for the current and following days from measured + forecast temperatures."""
    temperatures = inputs.forecast[:, 2]
    days = inputs.day_of_step
    climates = []
    for k, day in enumerate(np.unique(days)):
        hourly = temperatures[days == day].tolist()
        if k == 0:
            hourly = list(accrued.day_temperatures) + hourly
        climates.append(daily_climate(hourly))
    return climates


def build_problem(
    inputs: HorizonInputs,
    accrued: AccruedTotals,
    fits: ShadingFitCache,
    pv: PvParams,
    crop: CropParams,
    baselines: Baselines,
    omega: float,
    limits: OrientationLimits,
    objective: ObjectiveConfig = ObjectiveConfig(),
    field_area_ha: float = 1.0,
    dt: float = 1.0
) -> HorizonProblem:
    """
    Assemble the remaining-horizon problem from a forecast.

    Daylight steps are those with the sun up and positive forecast
    irradiance; all other steps carry no decision and no irradiance. The crop
    schedule (REG, LAI, interception per day) comes from forecast
    temperatures and does not depend on the decisions.

    Args:
        inputs: Sun, price, day and forecast arrays for steps t0..T-1
        accrued: Realized totals before t0
        fits: Shading fits covering every daylight step
        pv: PV parameters
        crop: Crop parameters
        baselines: Crop-only yield and sun-tracking revenue
        omega: Weight on the PV term
        limits: Tilt limits used for recovery
        objective: Scalarization mode
        field_area_ha: Field area for the economic mode
        dt: Step length in hours

    Returns:
        HorizonProblem

    Raises:
        ProblemBuildError: If omega is out of range or a daylight step has no fit
        UndefinedLERError: If a baseline is zero
    """
    if not 0.0 <= omega <= 1.0:
        raise ProblemBuildError(f"omega {omega} outside [0, 1]")
    if baselines.revenue_tracking <= 0.0:
        raise UndefinedLERError("sun-tracking revenue is zero; LER_pv is undefined")
    if baselines.y_crop_only <= 0.0:
        raise UndefinedLERError("crop-only yield is zero; LER_crop is undefined")

    if objective.mode == "economic":
        revenue_scale = 1.0
        yield_scale = objective.crop_price * field_area_ha
    else:
        revenue_scale = 1.0 / baselines.revenue_tracking
        yield_scale = 1.0 / baselines.y_crop_only

    n = len(inputs)
    steps = np.arange(inputs.t0, inputs.t0 + n)
    dni = inputs.forecast[:, 0]
    dhi = inputs.forecast[:, 1]
    daylight = (inputs.altitude > 0.0) & ((dni + dhi) > 0.0)

    idx = np.flatnonzero(daylight)
    t = steps[idx]
    missing = [int(s) for s in t if s not in fits]
    if missing:
        raise ProblemBuildError(f"no shading fit for daylight step(s) {missing[:5]}")

    g1 = np.array([fits.get(int(s)).g1 for s in t], dtype=float)
    g2 = np.array([fits.get(int(s)).g2 for s in t], dtype=float)

    d1 = inputs.sin_zenith[idx]
    d2 = inputs.cos_zenith[idx]
    dni_d = dni[idx]
    dhi_d = dhi[idx]
    b1 = 0.5 * dhi_d * d2
    b2 = -0.5 * dhi_d * d1
    c1 = -g1 * dni_d * pv.alpha
    c2 = pv.alpha * (dni_d - g2 * dni_d + dhi_d)

    energy = inputs.prices[idx] * dt * pv.area_total * pv.efficiency
    revenue_x = energy * (dni_d + b1)
    revenue_y = energy * b2
    revenue_constant = accrued.revenue + float(np.sum(energy * 0.5 * dhi_d))

    if n:
        first_day = int(inputs.day_of_step[0])
        schedule = phenology_schedule(accrued.state, _horizon_climates(inputs, accrued), crop)
        per_day = (
            crop.hi * BIOMASS_CONVERSION * crop.be * dt
            * schedule["reg"].to_numpy() * schedule["interception"].to_numpy()
        )
    else:
        first_day = accrued.state.day
        per_day = np.zeros(0)

    day = inputs.day_of_step[idx].astype(int)
    step_weight = per_day[day - first_day] if idx.size else np.zeros(0)
    yield_x = step_weight * c1
    current_day_par = per_day[0] * accrued.day_par if per_day.size else 0.0
    yield_constant = crop.hi * accrued.state.biomass + current_day_par + float(np.sum(step_weight * c2))

    return HorizonProblem(
        omega=omega,
        t0=inputs.t0,
        t=t,
        day=day,
        b1=b1, b2=b2, c1=c1, c2=c2, d1=d1, d2=d2,
        dni=dni_d, dhi=dhi_d,
        tracking_tilt=inputs.tracking_tilt[idx],
        revenue_weights=revenue_scale * energy,
        day_weights=yield_scale * per_day,
        first_day=first_day,
        revenue_x=revenue_x,
        revenue_y=revenue_y,
        revenue_constant=revenue_constant,
        yield_x=yield_x,
        yield_constant=yield_constant,
        revenue_scale=revenue_scale,
        yield_scale=yield_scale,
        baselines=baselines,
        limits=limits,
        accrued=accrued,
    )


def solve_steps(
    p: np.ndarray,
    q: np.ndarray,
    d1: np.ndarray,
    d2: np.ndarray,
    lower: float = SLAB_LOWER,
    upper: float = SLAB_UPPER
) -> tuple:
    """
    Exact maximizers of p * x + q * y over the disk and the slab, per step.

    Candidates are the unconstrained disk maximizer (p, q) / |(p, q)| when it
    lies in the slab and the circle points on each slab boundary line. A linear
    objective on the feasible set peaks at one of them. Ties go to the larger
    x; p = q = 0 returns (1, 0) flagged degenerate.

    Returns:
        (x, y, degenerate) arrays
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n = p.size
    if n == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool)

    norm_c = np.hypot(p, q)
    degenerate = norm_c == 0.0
    safe = np.where(degenerate, 1.0, norm_c)

    cand_x = np.full((n, 5), np.nan)
    cand_y = np.full((n, 5), np.nan)
    cand_x[:, 0] = p / safe
    cand_y[:, 0] = q / safe
    slab = d1 * cand_x[:, 0] + d2 * cand_y[:, 0]
    outside = (slab < lower - 1e-12) | (slab > upper + 1e-12)
    cand_x[outside, 0] = np.nan
    cand_y[outside, 0] = np.nan

    norm_d2 = d1 * d1 + d2 * d2
    norm_d = np.sqrt(norm_d2)
    for j, level in enumerate((lower, upper)):
        reach = np.abs(level) <= norm_d + 1e-15
        half = np.sqrt(np.clip(1.0 - level * level / norm_d2, 0.0, None))
        base_x = level * d1 / norm_d2
        base_y = level * d2 / norm_d2
        perp_x = -d2 / norm_d
        perp_y = d1 / norm_d
        for k, sign in enumerate((1.0, -1.0)):
            col = 1 + 2 * j + k
            cand_x[:, col] = np.where(reach, base_x + sign * half * perp_x, np.nan)
            cand_y[:, col] = np.where(reach, base_y + sign * half * perp_y, np.nan)

    values = p[:, None] * cand_x + q[:, None] * cand_y
    values = np.where(np.isnan(values), -np.inf, values)
    best = values.max(axis=1)
    eligible = values >= (best - 1e-12 * np.maximum(norm_c, 1e-300))[:, None]
    tie_x = np.where(eligible, cand_x, -np.inf)
    choice = np.argmax(tie_x, axis=1)
    rows = np.arange(n)

    x = cand_x[rows, choice]
    y = cand_y[rows, choice]
    x = np.where(degenerate, 1.0, x)
    y = np.where(degenerate, 0.0, y)
    return x, y, degenerate


def is_exact(x: float, y: float, tolerance: float = EXACTNESS_TOLERANCE) -> bool:
    """True when (x, y) lies on the unit circle within tolerance."""
    return 1.0 - (x * x + y * y) <= tolerance


def solve_step(coeff: StepCoefficients, p: float, q: float) -> StepDecision:
    """
    Solve one step exactly.

    Args:
        coeff: Step coefficients (slab normal d1, d2)
        p: Objective coefficient on x
        q: Objective coefficient on y

    Returns:
        StepDecision before tilt recovery
    """
    x, y, degenerate = solve_steps(np.array([p]), np.array([q]), np.array([coeff.d1]), np.array([coeff.d2]))
    xs, ys = float(x[0]), float(y[0])
    return StepDecision(t=coeff.t, x=xs, y=ys, exact=is_exact(xs, ys), degenerate=bool(degenerate[0]))


def recover_tilt(
    decision: StepDecision,
    tracking_tilt: float,
    tilt_limits: OrientationLimits,
    tolerance: float = EXACTNESS_TOLERANCE
) -> StepDecision:
    """
    Recover the tilt deviation from (x, y) and clamp the tilt into its limits.

    On the circle the deviation is the angle of (x, y), restricted to
    [-90, 90]. Inside the disk the candidates are sign(y) * arccos(x) (negative
    when y = 0) and arcsin(y); the larger magnitude wins.

    Args:
        decision: Solved decision
        tracking_tilt: Sun-tracking tilt of the step in degrees
        tilt_limits: Tilt design limits
        tolerance: Exactness tolerance on 1 - (x^2 + y^2)

    Returns:
        Decision with delta_tilt (applied, after clamping), tilt and tilt_clamped set
    """
    x = min(1.0, max(-1.0, decision.x))
    y = min(1.0, max(-1.0, decision.y))
    exact = is_exact(decision.x, decision.y, tolerance)

    if exact:
        delta = min(90.0, max(-90.0, math.degrees(math.atan2(y, x))))
    else:
        sign = 1.0 if y > 0.0 else -1.0
        delta_a = sign * math.degrees(math.acos(x))
        delta_b = math.degrees(math.asin(y))
        delta = delta_a if abs(delta_a) >= abs(delta_b) else delta_b

    target = tracking_tilt + delta
    tilt = min(tilt_limits.tilt_max, max(tilt_limits.tilt_min, target))
    return replace(
        decision,
        exact=exact,
        delta_tilt=tilt - tracking_tilt,
        tilt=tilt,
        tilt_clamped=tilt != target,
    )


def solve_horizon(
    problem: HorizonProblem,
    backend: str = "analytic",
    tolerance: float = EXACTNESS_TOLERANCE
) -> HorizonSolution:
    """
    Solve every daylight step of the horizon and report predictions.

    Args:
        problem: Assembled horizon problem
        backend: ``analytic`` (per-step exact) or ``conic`` (joint cvxpy solve)
        tolerance: Exactness tolerance on 1 - (x^2 + y^2)

    Returns:
        HorizonSolution with recovered decisions in time order

    Raises:
        SolverError: If the conic backend fails
    """
    p, q = problem.p, problem.q
    if backend == "conic" and p.size:
        from src.optimization.conic_solver import solve_conic

        x, y = solve_conic(p, q, problem.d1, problem.d2)
        degenerate = np.hypot(p, q) == 0.0
    else:
        x, y, degenerate = solve_steps(p, q, problem.d1, problem.d2)

    decisions = [
        recover_tilt(
            StepDecision(t=int(problem.t[i]), x=float(x[i]), y=float(y[i]),
                         exact=True, degenerate=bool(degenerate[i])),
            float(problem.tracking_tilt[i]),
            problem.limits,
            tolerance,
        )
        for i in range(problem.t.size)
    ]

    revenue = problem.predicted_revenue(x, y)
    crop_yield = problem.predicted_yield(x)
    return HorizonSolution(
        decisions=decisions,
        objective=problem.objective(x, y),
        predicted_revenue=revenue,
        predicted_yield=crop_yield,
        predicted_ler_pv=revenue / problem.baselines.revenue_tracking,
        predicted_ler_crop=crop_yield / problem.baselines.y_crop_only,
    )
