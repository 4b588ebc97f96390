"""
Command-line entry point.

Agrivoltaic MPC Tracker: shading fits, season runs, omega sweeps, baselines
and forecast demos, each writing CSV outputs plus a manifest.

    python -m src.main run --config scenarios/desk_season.json --mode open-loop
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.settings import get_settings
from src.control.mpc_engine import SeasonContext, SeasonRunner
from src.control.pareto import best_omega, inexact_error_correlation, omega_grid, pareto_violations, sweep_pareto
from src.errors.agrivoltaic_errors import AgrivoltaicError, ConfigError, ExitCode, get_error_message, message_for
from src.geometry.fit_cache import ShadingFitCache, hourly_r_squared
from src.logging.audit_logger import get_audit_logger
from src.reporting.result_writer import ResultWriter
from src.scenario.scenario_config import ScenarioConfig, config_hash, load_scenario, load_weather
from src.weather.forecast import WEATHER_COLUMNS, make_forecast, noise_schedule, value_ranges
from src.weather.weather_loader import weather_frame

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with the usage status."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def _float_list(argument: str) -> Callable[[str], List[float]]:
    def parse(text: str) -> List[float]:
        try:
            return [float(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(
                get_error_message("bad_argument", argument=argument, reason=str(e))
            ) from e
    return parse


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="Scenario JSON file")
    common.add_argument("--seed", type=int, default=None, help="Base seed (first scenario seed by default)")
    common.add_argument("--out", default=None, help="Output directory")
    common.add_argument("--jobs", type=int, default=None, help="Worker threads")
    common.add_argument("--fits", default=None, help="Shading fits CSV from fit-shading, reused instead of recomputed")

    parser = _Parser(prog="agripv", description=get_settings().app_name)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    commands.add_parser("fit-shading", parents=[common], help="Per-step affine shading fits")

    run = commands.add_parser("run", parents=[common], help="Open-loop or MPC season run")
    run.add_argument("--mode", choices=["open-loop", "mpc"], default="open-loop")
    run.add_argument("--omega", type=float, default=None, help="Weight on the PV term")
    run.add_argument("--noise", type=float, default=None, help="Forecast max std fraction for a single MPC run")
    run.add_argument("--noise-levels", type=_float_list("--noise-levels"), default=None,
                     help="Comma-separated noise levels; runs the forecast-noise study")
    run.add_argument("--seeds", type=int, default=None, help="Number of seeds per noise level")

    sweep = commands.add_parser("sweep", parents=[common], help="Open-loop omega sweep")
    grid = sweep.add_mutually_exclusive_group()
    grid.add_argument("--omegas", type=_float_list("--omegas"), default=None, help="Comma-separated omegas")
    grid.add_argument("--omega-step", type=float, default=None, help="Even grid step over [0, 1]")

    commands.add_parser("baselines", parents=[common], help="Crop-only yield and sun-tracking revenue")

    demo = commands.add_parser("forecast-demo", parents=[common], help="Noise schedule and one forecast trajectory")
    demo.add_argument("--noise", type=float, default=None, help="Forecast max std fraction")
    demo.add_argument("--issue-step", type=int, default=0, help="Step the forecast is issued at")

    return parser


def _runner(args: argparse.Namespace, cfg: ScenarioConfig) -> SeasonRunner:
    jobs = args.jobs or get_settings().default_jobs
    fits = ShadingFitCache.load_csv(args.fits) if args.fits else None
    return SeasonRunner(cfg, context=SeasonContext.build(cfg, fits=fits, jobs=jobs), jobs=jobs)


def _seed(args: argparse.Namespace, cfg: ScenarioConfig) -> int:
    return args.seed if args.seed is not None else cfg.seeds[0]


def _seed_list(args: argparse.Namespace, cfg: ScenarioConfig) -> List[int]:
    if args.seeds is None:
        return list(cfg.seeds) if args.seed is None else [args.seed]
    if args.seeds < 1:
        raise ConfigError(get_error_message("bad_argument", argument="--seeds", reason="must be at least 1"))
    base = _seed(args, cfg)
    return list(range(base, base + args.seeds))


def cmd_fit_shading(args: argparse.Namespace, cfg: ScenarioConfig, writer: ResultWriter) -> Dict:
    """Write per-step shading fits and their hourly R^2 aggregation."""
    context = SeasonContext.build(cfg, jobs=args.jobs or get_settings().default_jobs)
    writer.write_csv("shading_fits", context.fits.to_frame())
    hourly = hourly_r_squared(context.fits, context.timestamps)
    writer.write_csv("hourly_r_squared", hourly)

    summary = context.fits.summary()
    print(
        f"fits={summary['n_fits']} mean_R2={summary['mean_r_squared']:.6f} "
        f"worst_residual={summary['worst_residual']:.3g} monotonicity_violations={summary['monotonicity_violations']}"
    )
    return summary


def cmd_run(args: argparse.Namespace, cfg: ScenarioConfig, writer: ResultWriter) -> Dict:
    """Open-loop run, single MPC run, or forecast-noise study."""
    runner = _runner(args, cfg)

    if args.mode == "mpc" and (args.noise_levels is not None or args.seeds is not None):
        levels = args.noise_levels if args.noise_levels is not None else cfg.noise_levels
        study = runner.run_mpc_study(levels, _seed_list(args, cfg), args.omega)
        writer.write_csv("study", study)
        for row in study.itertuples(index=False):
            print(
                f"{row.condition}: LER_crop={row.ler_crop_mean:.6f} LER_pv={row.ler_pv_mean:.6f} "
                f"LER_total={row.ler_total_mean:.6f} (n={row.n_seeds})"
            )
        return {"conditions": len(study)}

    if args.mode == "mpc":
        result = runner.run_mpc(_seed(args, cfg), noise=args.noise, omega=args.omega)
    else:
        result = runner.run_open_loop(args.omega)

    writer.write_season(result)
    print(result.summary_line())
    return result.summary()


def cmd_sweep(args: argparse.Namespace, cfg: ScenarioConfig, writer: ResultWriter) -> Dict:
    """Open-loop omega sweep into a Pareto table."""
    if args.omegas is not None:
        omegas = args.omegas
    else:
        omegas = omega_grid(args.omega_step if args.omega_step is not None else 0.05)

    table = sweep_pareto(cfg, omegas, runner=_runner(args, cfg))
    writer.write_csv("pareto", table)

    best = best_omega(table)
    correlation = inexact_error_correlation(table)
    violations = pareto_violations(table)
    print(
        f"omegas={len(table)} best_omega={best['omega']:.3f} LER_total={best['ler_total']:.6f} "
        f"inexact_error_rank_corr={correlation:.3f}"
    )
    return {**best, "rank_correlation": correlation, **{f"{k}_violations": v for k, v in violations.items()}}


def cmd_baselines(args: argparse.Namespace, cfg: ScenarioConfig, writer: ResultWriter) -> Dict:
    """Single-use baselines of the scenario."""
    baselines = _runner(args, cfg).baselines()
    frame = pd.DataFrame([{"y_crop_only": baselines.y_crop_only, "revenue_tracking": baselines.revenue_tracking}])
    writer.write_csv("baselines", frame)
    print(f"y_crop_only={baselines.y_crop_only:.6f} revenue_tracking={baselines.revenue_tracking:.6f}")
    return frame.iloc[0].to_dict()


def cmd_forecast_demo(args: argparse.Namespace, cfg: ScenarioConfig, writer: ResultWriter) -> Dict:
    """Noise schedule per lead and one sample forecast trajectory."""
    noise = args.noise if args.noise is not None else cfg.forecast.max_std_fraction
    if noise < 0.0:
        raise ConfigError(get_error_message("bad_argument", argument="--noise", reason="must be non-negative"))
    forecast_cfg = cfg.forecast.model_copy(update={"max_std_fraction": noise})

    truth = weather_frame(load_weather(cfg))
    ranges = value_ranges(truth[list(WEATHER_COLUMNS)].to_numpy(dtype=float))
    max_lead = len(truth) - 1
    schedule = pd.DataFrame({"lead": np.arange(max_lead + 1)})
    for column, value_range in zip(WEATHER_COLUMNS, ranges):
        schedule[f"sigma_{column}"] = noise_schedule(forecast_cfg, float(value_range), max_lead)
    writer.write_csv("noise_schedule", schedule)

    trajectory = make_forecast(truth, args.issue_step, forecast_cfg, np.random.SeedSequence([_seed(args, cfg), args.issue_step]))
    sample = trajectory.frame.copy()
    for column in WEATHER_COLUMNS:
        sample[f"true_{column}"] = truth[column].to_numpy()[args.issue_step:]
    sample = sample.reset_index()
    writer.write_csv("forecast_sample", sample)

    print(f"noise={noise:.3f} leads={max_lead + 1} issued_at={args.issue_step}")
    return {"noise": noise, "steps": len(sample)}


COMMANDS = {
    "fit-shading": cmd_fit_shading,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "baselines": cmd_baselines,
    "forecast-demo": cmd_forecast_demo,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Command-line arguments (sys.argv[1:] when omitted)

    Returns:
        Exit status
    """
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(level="DEBUG" if settings.debug else settings.log_level.upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    audit_logger = get_audit_logger()

    try:
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError(get_error_message("bad_argument", argument="--jobs", reason="must be at least 1"))

        cfg = load_scenario(args.config)
        digest = config_hash(cfg)
        seeds = _seed_list(args, cfg) if getattr(args, "seeds", None) is not None else [_seed(args, cfg)]
        out_dir = Path(args.out) if args.out else Path(settings.output_dir) / args.command
        writer = ResultWriter(out_dir)

        audit_logger.log_run_started(args.command, digest, seeds, {"config": str(args.config), "jobs": args.jobs})
        started = time.perf_counter()
        summary = COMMANDS[args.command](args, cfg, writer)
        elapsed = time.perf_counter() - started

        manifest = writer.write_manifest(args.command, digest, seeds, elapsed)
        audit_logger.log_system_event("outputs_written", {"manifest": str(manifest), "files": len(writer.outputs)})
        audit_logger.log_run_completed(args.command, digest, elapsed, summary)
        return ExitCode.SUCCESS

    except AgrivoltaicError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        audit_logger.log_validation_failure(str(args.config), type(e).__name__, str(e))
        print(message_for(e), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(get_error_message("weather_invalid", reason=str(e)), file=sys.stderr)
        return ExitCode.DATA


if __name__ == "__main__":
    sys.exit(main())
