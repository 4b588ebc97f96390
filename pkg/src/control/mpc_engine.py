"""
Season engine: baselines, open-loop runs and the receding-horizon loop.

Loop per step t:
1. Issue a forecast from the measurement at t
2. Build and solve the remaining-horizon problem
3. Apply only the decision for step t to the exact models (true weather,
   exact shading, exact irradiance)
4. At each day boundary, advance the crop state with realized PAR and
   measured temperatures

Open-loop runs solve once at t = 0 with the true weather and apply every
decision. Both paths share the same realized-step arithmetic, so a
noise-free MPC run reproduces the open-loop run exactly.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.settings import get_settings
from src.crop.crop_epic import (
    CropState,
    advance_day,
    daily_climate,
    simulate_season,
    yield_and_ler,
)
from src.errors.agrivoltaic_errors import DataError
from src.geometry.fit_cache import ShadingFitCache, compute_fits
from src.geometry.shading import par_field, shading_factor
from src.geometry.solar_geometry import (
    PanelOrientation,
    SolarPosition,
    sun_positions,
    sun_tracking_orientation,
)
from src.logging.audit_logger import get_audit_logger
from src.optimization.optimizer import (
    AccruedTotals,
    Baselines,
    HorizonInputs,
    HorizonSolution,
    StepDecision,
    build_problem,
    solve_horizon,
)
from src.pv.pv_array import panel_irradiance, power, price_series, revenue
from src.scenario.scenario_config import HOURS_PER_DAY, ScenarioConfig, load_weather
from src.weather.forecast import WEATHER_COLUMNS, forecast_values, value_ranges
from src.weather.weather_loader import WeatherSample, weather_frame


@dataclass
class SeasonContext:
    """
    Season-wide arrays computed once per scenario.

    Sun positions, tracking orientations, trig terms, prices and shading fits
    are weather-independent or truth-only and are shared by every run.
    """
    cfg: ScenarioConfig
    samples: List[WeatherSample]
    timestamps: pd.DatetimeIndex
    truth: np.ndarray
    suns: List[SolarPosition]
    altitude: np.ndarray
    sin_zenith: np.ndarray
    cos_zenith: np.ndarray
    trackings: List[PanelOrientation]
    tracking_tilt: np.ndarray
    prices: np.ndarray
    day_of_step: np.ndarray
    sun_up: np.ndarray
    daylight: np.ndarray
    ranges: np.ndarray
    fits: ShadingFitCache

    @classmethod
    def build(
        cls,
        cfg: ScenarioConfig,
        samples: Optional[Sequence[WeatherSample]] = None,
        fits: Optional[ShadingFitCache] = None,
        jobs: int = 1
    ) -> "SeasonContext":
        """
        Build the context for a scenario.

        Args:
            cfg: Scenario configuration
            samples: Season weather; loaded from the scenario when omitted
            fits: Precomputed shading fits; computed when omitted
            jobs: Worker threads for the shading fits

        Raises:
            DataError: If the weather does not have 24 * days samples
        """
        settings = get_settings()
        samples = list(samples) if samples is not None else load_weather(cfg)
        if len(samples) != cfg.n_steps:
            raise DataError(f"season needs {cfg.n_steps} hourly samples, got {len(samples)}")

        frame = weather_frame(samples)
        truth = frame[list(WEATHER_COLUMNS)].to_numpy(dtype=float)
        positions = sun_positions(cfg.site, frame.index)
        altitude = positions["altitude_s"].to_numpy(dtype=float)
        azimuth = positions["azimuth_s"].to_numpy(dtype=float)
        suns = [SolarPosition(azimuth_s=float(a), altitude_s=float(b)) for a, b in zip(azimuth, altitude)]
        trackings = [sun_tracking_orientation(sun, cfg.limits, cfg.park) for sun in suns]

        zenith = np.radians(90.0 - altitude)
        sun_up = altitude > 0.0

        if fits is None:
            fits = compute_fits(
                cfg.layout, suns, trackings, cfg.limits, jobs=jobs,
                step=settings.shading_sweep_step_deg,
                monotonicity_tolerance=settings.monotonicity_tolerance,
            )
            get_audit_logger().log_shading_fits(**fits.summary())

        return cls(
            cfg=cfg,
            samples=samples,
            timestamps=frame.index,
            truth=truth,
            suns=suns,
            altitude=altitude,
            sin_zenith=np.sin(zenith),
            cos_zenith=np.cos(zenith),
            trackings=trackings,
            tracking_tilt=90.0 - altitude,
            prices=price_series(cfg.pv, frame.index),
            day_of_step=np.arange(cfg.n_steps) // HOURS_PER_DAY,
            sun_up=sun_up,
            daylight=sun_up & ((truth[:, 0] + truth[:, 1]) > 0.0),
            ranges=value_ranges(truth),
            fits=fits,
        )

    @property
    def n_steps(self) -> int:
        return int(self.truth.shape[0])

    @property
    def hours(self) -> np.ndarray:
        return np.asarray(self.timestamps.hour)

    def horizon_inputs(self, t0: int, forecast: np.ndarray) -> HorizonInputs:
        """Inputs for the horizon t0..T-1 with the given forecast rows."""
        return HorizonInputs(
            t0=t0,
            altitude=self.altitude[t0:],
            sin_zenith=self.sin_zenith[t0:],
            cos_zenith=self.cos_zenith[t0:],
            tracking_tilt=self.tracking_tilt[t0:],
            prices=self.prices[t0:],
            day_of_step=self.day_of_step[t0:],
            forecast=forecast,
        )

    def realize(self, t: int, tilt: Optional[float]) -> Dict[str, float]:
        """
        Exact-model outcome of holding ``tilt`` at step t.

        The azimuth follows the (clamped) tracking azimuth. Steps outside
        daylight produce no power and no field PAR.
        """
        tracking = self.trackings[t]
        panel = PanelOrientation(tracking.azimuth_pv, tracking.tilt_pv if tilt is None else tilt)
        if not self.daylight[t]:
            return {"azimuth": panel.azimuth_pv, "tilt": panel.tilt_pv, "i_db": 0.0, "i_diff": 0.0,
                    "power": 0.0, "shading": 0.0, "par_field": 0.0}

        sample = self.samples[t]
        sun = self.suns[t]
        i_db, i_diff = panel_irradiance(sample, sun, panel)
        shaded = shading_factor(self.cfg.layout, sun, panel)
        alpha = self.cfg.pv.alpha
        return {
            "azimuth": panel.azimuth_pv,
            "tilt": panel.tilt_pv,
            "i_db": i_db,
            "i_diff": i_diff,
            "power": power(self.cfg.pv, i_db, i_diff),
            "shading": shaded,
            "par_field": par_field(shaded, alpha * sample.dni, alpha * sample.dhi),
        }


@dataclass
class SeasonResult:
    """Realized and predicted outcome of one season run."""
    mode: str
    omega: float
    noise: float
    seed: Optional[int]
    steps: pd.DataFrame
    daily: pd.DataFrame
    crop_yield: float
    revenue: float
    ler_crop: float
    ler_pv: float
    predicted_yield: float
    predicted_revenue: float
    predicted_ler_crop: float
    predicted_ler_pv: float
    n_daylight: int
    inexact_steps: int
    clamped_steps: int

    @property
    def ler_total(self) -> float:
        return self.ler_crop + self.ler_pv

    @property
    def predicted_ler_total(self) -> float:
        return self.predicted_ler_crop + self.predicted_ler_pv

    @property
    def inexact_fraction(self) -> float:
        return self.inexact_steps / self.n_daylight if self.n_daylight else 0.0

    @property
    def yield_pct_error(self) -> float:
        return percent_error(self.crop_yield, self.predicted_yield)

    @property
    def revenue_pct_error(self) -> float:
        return percent_error(self.revenue, self.predicted_revenue)

    def summary(self) -> Dict[str, float]:
        """Headline numbers of the run."""
        return {
            "mode": self.mode,
            "omega": self.omega,
            "noise": self.noise,
            "seed": self.seed,
            "yield": self.crop_yield,
            "revenue": self.revenue,
            "ler_crop": self.ler_crop,
            "ler_pv": self.ler_pv,
            "ler_total": self.ler_total,
            "predicted_yield": self.predicted_yield,
            "predicted_revenue": self.predicted_revenue,
            "predicted_ler_crop": self.predicted_ler_crop,
            "predicted_ler_pv": self.predicted_ler_pv,
            "yield_pct_error": self.yield_pct_error,
            "revenue_pct_error": self.revenue_pct_error,
            "n_daylight": self.n_daylight,
            "inexact_steps": self.inexact_steps,
            "inexact_fraction": self.inexact_fraction,
            "clamped_steps": self.clamped_steps,
        }

    def summary_line(self) -> str:
        """One-line LER summary."""
        return (
            f"omega={self.omega:.3f} LER_crop={self.ler_crop:.6f} LER_pv={self.ler_pv:.6f} "
            f"LER_total={self.ler_total:.6f}"
        )


def percent_error(realized: float, predicted: float) -> float:
    """Absolute percent error of realized against predicted."""
    if predicted == 0.0:
        return float("nan")
    return 100.0 * abs(realized - predicted) / abs(predicted)


class _SeasonAccumulator:
    """Realized trajectory of one run, advanced step by step."""

    def __init__(self, context: SeasonContext, audit_logger, tracking_powers: np.ndarray):
        self.context = context
        self.audit_logger = audit_logger
        self.tracking_powers = tracking_powers
        self.state = CropState.initial()
        self.revenue = 0.0
        self.day_par: List[float] = []
        self.day_temperatures: List[float] = []
        self.rows: List[Dict] = []
        self.states: List[CropState] = []
        self.decisions: List[StepDecision] = []

    def accrued(self) -> AccruedTotals:
        return AccruedTotals(
            state=self.state,
            revenue=self.revenue,
            day_par=math.fsum(self.day_par),
            day_temperatures=tuple(self.day_temperatures),
        )

    def apply(self, t: int, decision: Optional[StepDecision]) -> None:
        ctx = self.context
        outcome = ctx.realize(t, decision.tilt if decision is not None else None)
        if decision is not None:
            self.decisions.append(decision)

        self.revenue += ctx.prices[t] * outcome["power"] * ctx.cfg.dt
        self.day_par.append(outcome["par_field"])
        self.day_temperatures.append(float(ctx.truth[t, 2]))
        self.rows.append({
            "t": t,
            "timestamp": ctx.timestamps[t],
            "decision": decision is not None,
            "x": decision.x if decision else np.nan,
            "y": decision.y if decision else np.nan,
            "exact": decision.exact if decision else True,
            "delta_tilt": decision.delta_tilt if decision else 0.0,
            "tilt_clamped": decision.tilt_clamped if decision else False,
            **outcome,
            "delta_power": outcome["power"] - self.tracking_powers[t],
        })

        if (t + 1) % HOURS_PER_DAY == 0:
            climate = daily_climate(self.day_temperatures)
            self.state = advance_day(self.state, climate, self.day_par, ctx.cfg.crop, ctx.cfg.dt)
            self.states.append(self.state)
            self.audit_logger.log_day_advanced(self.state.day, self.state.hui, self.state.lai, self.state.biomass)
            self.day_par = []
            self.day_temperatures = []

    def result(
        self,
        mode: str,
        omega: float,
        noise: float,
        seed: Optional[int],
        baselines: Baselines,
        prediction: HorizonSolution
    ) -> SeasonResult:
        ctx = self.context
        steps = pd.DataFrame(self.rows)
        daily = pd.DataFrame([
            {"day": s.day, "hui": s.hui, "reg": s.reg, "huf": s.huf, "lai": s.lai, "biomass": s.biomass}
            for s in self.states
        ])
        realized_revenue = revenue(steps["power"].to_numpy(), ctx.cfg.pv, ctx.cfg.dt, ctx.hours)
        crop_yield, ler_crop = yield_and_ler(self.state, ctx.cfg.crop, baselines.y_crop_only)

        return SeasonResult(
            mode=mode,
            omega=omega,
            noise=noise,
            seed=seed,
            steps=steps,
            daily=daily,
            crop_yield=crop_yield,
            revenue=realized_revenue,
            ler_crop=ler_crop,
            ler_pv=realized_revenue / baselines.revenue_tracking,
            predicted_yield=prediction.predicted_yield,
            predicted_revenue=prediction.predicted_revenue,
            predicted_ler_crop=prediction.predicted_ler_crop,
            predicted_ler_pv=prediction.predicted_ler_pv,
            n_daylight=len(self.decisions),
            inexact_steps=sum(1 for d in self.decisions if not d.exact),
            clamped_steps=sum(1 for d in self.decisions if d.tilt_clamped),
        )


class SeasonRunner:
    """
    Runs seasons of one scenario.

    Holds the season context (sun, fits, prices) and the baselines so that
    repeated runs (omega sweeps, seeds, noise levels) reuse them.
    """

    def __init__(
        self,
        cfg: ScenarioConfig,
        context: Optional[SeasonContext] = None,
        jobs: Optional[int] = None
    ):
        """
        Initialize season runner.

        Args:
            cfg: Scenario configuration
            context: Prebuilt season context
            jobs: Worker threads (default from settings)
        """
        self.settings = get_settings()
        self.audit_logger = get_audit_logger()
        self.cfg = cfg
        self.jobs = jobs or self.settings.default_jobs
        self.context = context or SeasonContext.build(cfg, jobs=self.jobs)
        self._tracking_powers: Optional[np.ndarray] = None
        self._baselines: Optional[Baselines] = None

    def tracking_powers(self) -> np.ndarray:
        """Power per step under (clamped) sun tracking."""
        if self._tracking_powers is None:
            ctx = self.context
            self._tracking_powers = np.array([ctx.realize(t, None)["power"] for t in range(ctx.n_steps)])
        return self._tracking_powers

    def baselines(self) -> Baselines:
        """
        Crop-only yield and sun-tracking revenue.

        The crop-only season sees no shading; configured overrides take
        precedence over computed values.
        """
        if self._baselines is not None:
            return self._baselines

        if self.cfg.baselines is not None:
            self._baselines = Baselines(
                y_crop_only=self.cfg.baselines.y_crop_only,
                revenue_tracking=self.cfg.baselines.revenue_tracking,
            )
            return self._baselines

        ctx = self.context
        alpha = self.cfg.pv.alpha
        unshaded = np.where(ctx.daylight, alpha * (ctx.truth[:, 0] + ctx.truth[:, 1]), 0.0)
        climates = [
            daily_climate(ctx.truth[day * HOURS_PER_DAY:(day + 1) * HOURS_PER_DAY, 2].tolist())
            for day in range(self.cfg.days)
        ]
        par_by_day = [unshaded[day * HOURS_PER_DAY:(day + 1) * HOURS_PER_DAY].tolist() for day in range(self.cfg.days)]
        final = simulate_season(climates, par_by_day, self.cfg.crop, self.cfg.dt)[-1]

        self._baselines = Baselines(
            y_crop_only=self.cfg.crop.hi * final.biomass,
            revenue_tracking=revenue(self.tracking_powers(), self.cfg.pv, self.cfg.dt, ctx.hours),
        )
        return self._baselines

    def _solve(self, t0: int, forecast: np.ndarray, accrued: AccruedTotals, omega: float) -> HorizonSolution:
        problem = build_problem(
            self.context.horizon_inputs(t0, forecast),
            accrued,
            self.context.fits,
            self.cfg.pv,
            self.cfg.crop,
            self.baselines(),
            omega,
            self.cfg.limits,
            objective=self.cfg.objective,
            field_area_ha=self.cfg.field_area_ha,
            dt=self.cfg.dt,
        )
        solution = solve_horizon(problem, self.cfg.objective.backend, self.settings.exactness_tolerance)
        if self.settings.enable_step_logging:
            self.audit_logger.log_horizon_solved(t0, len(solution.decisions), solution.inexact_steps, solution.objective)
        return solution

    def run_open_loop(self, omega: Optional[float] = None) -> SeasonResult:
        """
        Solve once over the season with the true weather and apply every decision.

        Args:
            omega: Weight on the PV term (scenario value when omitted)

        Returns:
            SeasonResult with realized outcomes and linear-model predictions
        """
        omega = self.cfg.omega if omega is None else omega
        ctx = self.context
        solution = self._solve(0, ctx.truth, AccruedTotals(), omega)
        plan = {d.t: d for d in solution.decisions}

        run = _SeasonAccumulator(ctx, self.audit_logger, self.tracking_powers())
        for t in range(ctx.n_steps):
            run.apply(t, plan.get(t))
        return run.result("open-loop", omega, 0.0, None, self.baselines(), solution)

    def run_mpc(self, seed: int, noise: Optional[float] = None, omega: Optional[float] = None) -> SeasonResult:
        """
        Receding-horizon run with forecast noise.

        Args:
            seed: Base seed; step t draws from SeedSequence([seed, t])
            noise: Forecast max std fraction (scenario value when omitted)
            omega: Weight on the PV term (scenario value when omitted)

        Returns:
            SeasonResult; predictions are those of the first solve
        """
        omega = self.cfg.omega if omega is None else omega
        forecast_cfg = self.cfg.forecast
        if noise is not None:
            forecast_cfg = forecast_cfg.model_copy(update={"max_std_fraction": noise})

        ctx = self.context
        run = _SeasonAccumulator(ctx, self.audit_logger, self.tracking_powers())
        first_solution: Optional[HorizonSolution] = None

        for t in range(ctx.n_steps):
            decision = None
            if self.cfg.solve_cadence == "hourly" or ctx.sun_up[t]:
                forecast = forecast_values(
                    ctx.truth, t, forecast_cfg, np.random.SeedSequence([seed, t]),
                    daylight=ctx.sun_up, ranges=ctx.ranges,
                )
                solution = self._solve(t, forecast, run.accrued(), omega)
                if first_solution is None:
                    first_solution = solution
                head = solution.first()
                if head is not None and head.t == t:
                    decision = head
            run.apply(t, decision)

        if first_solution is None:
            first_solution = self._solve(0, ctx.truth, AccruedTotals(), omega)
        return run.result("mpc", omega, forecast_cfg.max_std_fraction, seed, self.baselines(), first_solution)

    def run_mpc_study(
        self,
        noise_levels: Sequence[float],
        seeds: Sequence[int],
        omega: Optional[float] = None
    ) -> pd.DataFrame:
        """
        Forecast-noise study: perfect-forecast rows plus seed statistics per noise level.

        Args:
            noise_levels: Forecast max std fractions
            seeds: Seeds run at every noise level
            omega: Weight on the PV term (scenario value when omitted)

        Returns:
            DataFrame with one row per condition and mean/std of each LER
        """
        omega = self.cfg.omega if omega is None else omega
        perfect = self.run_open_loop(omega)
        crop_only = self.run_open_loop(0.0)

        tasks = [(level, seed) for level in noise_levels for seed in seeds]

        def run_one(task):
            level, seed = task
            return self.run_mpc(seed, noise=level, omega=omega)

        if self.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                results = list(executor.map(run_one, tasks))
        else:
            results = [run_one(task) for task in tasks]

        rows = [
            _study_row("perfect forecast", omega, 0.0, [perfect]),
            _study_row("perfect forecast, crop only", 0.0, 0.0, [crop_only]),
        ]
        for level in noise_levels:
            group = [r for r, (lvl, _) in zip(results, tasks) if lvl == level]
            rows.append(_study_row(f"noise {level:.0%}", omega, level, group))
        return pd.DataFrame(rows)


def _study_row(condition: str, omega: float, noise: float, results: Sequence[SeasonResult]) -> Dict:
    row = {"condition": condition, "omega": omega, "noise": noise, "n_seeds": len(results)}
    for name in ("ler_crop", "ler_pv", "ler_total"):
        values = np.array([getattr(r, name) for r in results], dtype=float)
        row[f"{name}_mean"] = float(values.mean())
        row[f"{name}_std"] = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return row


def run_baselines(cfg: ScenarioConfig, runner: Optional[SeasonRunner] = None) -> Baselines:
    """Crop-only yield and sun-tracking revenue of a scenario."""
    return (runner or SeasonRunner(cfg)).baselines()


def run_open_loop(cfg: ScenarioConfig, runner: Optional[SeasonRunner] = None) -> SeasonResult:
    """Perfect-forecast season at the scenario's omega."""
    return (runner or SeasonRunner(cfg)).run_open_loop()


def run_mpc(cfg: ScenarioConfig, seed: int, runner: Optional[SeasonRunner] = None) -> SeasonResult:
    """Closed-loop season at the scenario's omega and forecast noise."""
    return (runner or SeasonRunner(cfg)).run_mpc(seed)


def run_mpc_study(
    cfg: ScenarioConfig,
    noise_levels: Optional[Sequence[float]] = None,
    seeds: Optional[Sequence[int]] = None,
    runner: Optional[SeasonRunner] = None
) -> pd.DataFrame:
    """Forecast-noise study with the scenario's noise levels and seeds by default."""
    runner = runner or SeasonRunner(cfg)
    return runner.run_mpc_study(
        cfg.noise_levels if noise_levels is None else noise_levels,
        cfg.seeds if seeds is None else seeds,
    )
