"""
Weighted-sum omega sweep of the yield/revenue trade-off.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from src.control.mpc_engine import SeasonResult, SeasonRunner
from src.errors.agrivoltaic_errors import ConfigError
from src.scenario.scenario_config import ScenarioConfig

logger = logging.getLogger(__name__)

PARETO_COLUMNS = [
    "omega",
    "yield",
    "revenue",
    "normalized_yield",
    "normalized_revenue",
    "predicted_normalized_yield",
    "predicted_normalized_revenue",
    "ler_crop",
    "ler_pv",
    "ler_total",
    "inexact_fraction",
    "yield_pct_error",
    "revenue_pct_error",
    "clamped_steps",
]


def omega_grid(step: float) -> np.ndarray:
    """Evenly spaced omegas from 0 to 1 inclusive."""
    if not 0.0 < step <= 1.0:
        raise ConfigError(f"omega step {step} outside (0, 1]")
    n = int(round(1.0 / step))
    if abs(n * step - 1.0) > 1e-9:
        raise ConfigError(f"omega step {step} does not divide 1 evenly")
    return np.round(np.linspace(0.0, 1.0, n + 1), 12)


def sweep_pareto(
    cfg: ScenarioConfig,
    omegas: Sequence[float],
    runner: Optional[SeasonRunner] = None,
    jobs: Optional[int] = None
) -> pd.DataFrame:
    """
    Open-loop runs over a grid of omegas.

    Yield is normalized by the omega = 0 run and revenue by the omega = 1 run;
    both anchors are computed once even when the grid omits them.

    Args:
        cfg: Scenario configuration
        omegas: Weights in [0, 1]
        runner: Season runner to reuse
        jobs: Worker threads (runner default when omitted)

    Returns:
        DataFrame with PARETO_COLUMNS, sorted by omega

    Raises:
        ConfigError: If an omega lies outside [0, 1]
    """
    omegas = sorted({float(w) for w in omegas})
    if any(w < 0.0 or w > 1.0 for w in omegas):
        raise ConfigError(f"omegas must lie in [0, 1], got {omegas}")

    runner = runner or SeasonRunner(cfg, jobs=jobs)
    runner.baselines()
    workers = jobs or runner.jobs
    needed = sorted(set(omegas) | {0.0, 1.0})

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = dict(zip(needed, executor.map(runner.run_open_loop, needed)))
    else:
        results = {w: runner.run_open_loop(w) for w in needed}

    crop_anchor = results[0.0]
    pv_anchor = results[1.0]
    table = pd.DataFrame(
        [_pareto_row(results[w], crop_anchor, pv_anchor) for w in omegas],
        columns=PARETO_COLUMNS,
    )

    violations = pareto_violations(table, tolerance=1e-6, predicted=True)
    if violations["revenue"] or violations["yield"]:
        logger.warning("predicted Pareto front is not monotone in omega: %s", violations)
    return table


def _pareto_row(result: SeasonResult, crop_anchor: SeasonResult, pv_anchor: SeasonResult) -> Dict:
    return {
        "omega": result.omega,
        "yield": result.crop_yield,
        "revenue": result.revenue,
        "normalized_yield": result.crop_yield / crop_anchor.crop_yield,
        "normalized_revenue": result.revenue / pv_anchor.revenue,
        "predicted_normalized_yield": result.predicted_yield / crop_anchor.predicted_yield,
        "predicted_normalized_revenue": result.predicted_revenue / pv_anchor.predicted_revenue,
        "ler_crop": result.ler_crop,
        "ler_pv": result.ler_pv,
        "ler_total": result.ler_total,
        "inexact_fraction": result.inexact_fraction,
        "yield_pct_error": result.yield_pct_error,
        "revenue_pct_error": result.revenue_pct_error,
        "clamped_steps": result.clamped_steps,
    }


def pareto_violations(table: pd.DataFrame, tolerance: float = 1e-6, predicted: bool = False) -> Dict[str, int]:
    """
    Count steps of the sweep where revenue falls or yield rises with omega.

    Args:
        table: Output of :func:`sweep_pareto`
        tolerance: Allowed slack on normalized values
        predicted: Check the linear-model predictions instead of realized values

    Returns:
        {"revenue": n, "yield": m}
    """
    prefix = "predicted_" if predicted else ""
    ordered = table.sort_values("omega")
    revenue = np.diff(ordered[f"{prefix}normalized_revenue"].to_numpy())
    crop = np.diff(ordered[f"{prefix}normalized_yield"].to_numpy())
    return {
        "revenue": int(np.count_nonzero(revenue < -tolerance)),
        "yield": int(np.count_nonzero(crop > tolerance)),
    }


def best_omega(table: pd.DataFrame) -> Dict[str, float]:
    """Omega with the highest total LER."""
    row = table.loc[table["ler_total"].idxmax()]
    return {"omega": float(row["omega"]), "ler_total": float(row["ler_total"])}


def inexact_error_correlation(table: pd.DataFrame) -> float:
    """
    Spearman rank correlation between the inexact-step fraction and the
    mean of the yield and revenue percent errors across the sweep.

    Returns:
        Correlation, or NaN when either series is constant
    """
    fraction = table["inexact_fraction"].to_numpy(dtype=float)
    error = 0.5 * (table["yield_pct_error"].to_numpy(dtype=float) + table["revenue_pct_error"].to_numpy(dtype=float))
    keep = np.isfinite(fraction) & np.isfinite(error)
    fraction, error = fraction[keep], error[keep]
    if fraction.size < 2 or np.ptp(fraction) == 0.0 or np.ptp(error) == 0.0:
        return float("nan")
    correlation, _ = spearmanr(fraction, error)
    return float(correlation)
