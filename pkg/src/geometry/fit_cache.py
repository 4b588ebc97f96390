"""
Per-step shading fit cache.

Fits depend on sun position and layout only, so a season's fits are computed
once, then read by every MPC iteration and every omega of a sweep.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, fields
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.errors.agrivoltaic_errors import DataError, ShadingFitError
from src.geometry.shading import ArrayLayout, ShadingAffineFit, fit_affine_sf
from src.geometry.solar_geometry import OrientationLimits, PanelOrientation, SolarPosition

logger = logging.getLogger(__name__)

FIT_COLUMNS = [f.name for f in fields(ShadingAffineFit)]


class ShadingFitCache:
    """
    Read-only mapping from time index to ShadingAffineFit.
    """

    def __init__(self, fits: Sequence[ShadingAffineFit]):
        """
        Initialize the cache.

        Args:
            fits: One fit per daylight step
        """
        self._fits: Dict[int, ShadingAffineFit] = {fit.t: fit for fit in fits}

    def __contains__(self, t: int) -> bool:
        return t in self._fits

    def __len__(self) -> int:
        return len(self._fits)

    def __iter__(self) -> Iterator[ShadingAffineFit]:
        return iter(self.fits())

    def get(self, t: int) -> Optional[ShadingAffineFit]:
        """Fit for step t, or None."""
        return self._fits.get(t)

    def fits(self) -> List[ShadingAffineFit]:
        """All fits in time order."""
        return [self._fits[t] for t in sorted(self._fits)]

    def to_frame(self) -> pd.DataFrame:
        """Fits as a DataFrame with one row per step."""
        return pd.DataFrame([asdict(fit) for fit in self.fits()], columns=FIT_COLUMNS)

    def summary(self) -> Dict[str, float]:
        """Mean R^2, worst residual and total monotonicity violations."""
        frame = self.to_frame()
        if frame.empty:
            return {"n_fits": 0, "mean_r_squared": float("nan"), "worst_residual": 0.0, "monotonicity_violations": 0}
        return {
            "n_fits": int(len(frame)),
            "mean_r_squared": float(frame["r_squared"].mean()),
            "worst_residual": float(frame["max_residual"].max()),
            "monotonicity_violations": int(frame["monotone_violations"].sum()),
        }

    @classmethod
    def load_csv(cls, path: Union[str, Path]) -> "ShadingFitCache":
        """
        Load fits written by the ``fit-shading`` command.

        Raises:
            DataError: If the file is missing or lacks fit columns
        """
        path = Path(path)
        if not path.exists():
            raise DataError(f"shading fit file '{path}' not found")
        frame = pd.read_csv(path)
        missing = [c for c in FIT_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"shading fit file '{path}' lacks column(s): {', '.join(missing)}")

        fits = [
            ShadingAffineFit(
                t=int(row.t),
                g1=float(row.g1),
                g2=float(row.g2),
                r_squared=float(row.r_squared),
                max_residual=float(row.max_residual),
                sf_tracking=float(row.sf_tracking),
                n_points=int(row.n_points),
                monotone_violations=int(row.monotone_violations),
            )
            for row in frame.itertuples(index=False)
        ]
        return cls(fits)


def compute_fits(
    layout: ArrayLayout,
    suns: Sequence[SolarPosition],
    trackings: Sequence[PanelOrientation],
    limits: OrientationLimits,
    jobs: int = 1,
    step: float = 1.0,
    monotonicity_tolerance: float = 1e-9
) -> ShadingFitCache:
    """
    Fit every daylight step of a season.

    Args:
        layout: Array and field geometry
        suns: Sun position per step
        trackings: Clamped sun-tracking orientation per step; only its azimuth is used
        limits: Tilt design limits
        jobs: Worker threads
        step: Sweep resolution in degrees
        monotonicity_tolerance: Slack for monotonicity counting

    Returns:
        ShadingFitCache covering all steps with the sun above the horizon

    Raises:
        ShadingFitError: If any daylight step cannot be fitted
    """
    if len(suns) != len(trackings):
        raise ShadingFitError(f"{len(suns)} sun positions but {len(trackings)} tracking orientations")

    steps = [t for t, sun in enumerate(suns) if sun.is_daylight]

    def fit_one(t: int) -> ShadingAffineFit:
        # delta is measured from the unclamped tracking tilt, as in the optimizer
        reference = PanelOrientation(trackings[t].azimuth_pv, 90.0 - suns[t].altitude_s)
        return fit_affine_sf(
            layout, suns[t], reference, limits, t=t, step=step,
            monotonicity_tolerance=monotonicity_tolerance
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            fits = list(executor.map(fit_one, steps))
    else:
        fits = [fit_one(t) for t in steps]

    negative = sum(1 for fit in fits if fit.g1 < 0.0)
    if negative:
        logger.warning(
            "%d of %d shading fits have g1 < 0 (shading grows as tilt leaves tracking)", negative, len(fits)
        )
    return ShadingFitCache(fits)


def hourly_r_squared(fits: ShadingFitCache, timestamps: pd.DatetimeIndex) -> pd.DataFrame:
    """
    Mean R^2 per hour of day.

    Args:
        fits: Season fits
        timestamps: Timestamp of every step of the season

    Returns:
        DataFrame with hour, mean_r_squared, min_r_squared and n_fits columns
    """
    frame = fits.to_frame()
    if frame.empty:
        return pd.DataFrame(columns=["hour", "mean_r_squared", "min_r_squared", "n_fits"])
    frame["hour"] = np.asarray(timestamps.hour)[frame["t"].to_numpy()]
    grouped = frame.groupby("hour")["r_squared"]
    return pd.DataFrame({
        "mean_r_squared": grouped.mean(),
        "min_r_squared": grouped.min(),
        "n_fits": grouped.size(),
    }).reset_index()
