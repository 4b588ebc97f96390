"""
CSV bundles and run manifests.

Every CSV the CLI writes has a fixed column schema. The schema set carries one
version number (``settings.csv_schema_version``); changing any column list
requires bumping it.
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import BaseModel, Field

from config.settings import get_settings
from src.control.mpc_engine import SeasonResult
from src.control.pareto import PARETO_COLUMNS
from src.errors.agrivoltaic_errors import DataError
from src.geometry.fit_cache import FIT_COLUMNS

logger = logging.getLogger(__name__)

CSV_SCHEMAS: Dict[str, Tuple[str, ...]] = {
    "decisions": ("t", "timestamp", "decision", "x", "y", "exact", "delta_tilt", "tilt_clamped", "azimuth", "tilt"),
    "power": ("t", "timestamp", "i_db", "i_diff", "power", "delta_power"),
    "par": ("t", "timestamp", "shading", "par_field"),
    "daily_crop": ("day", "hui", "reg", "huf", "lai", "biomass"),
    "summary": (
        "mode", "omega", "noise", "seed", "yield", "revenue", "ler_crop", "ler_pv", "ler_total",
        "predicted_yield", "predicted_revenue", "predicted_ler_crop", "predicted_ler_pv",
        "yield_pct_error", "revenue_pct_error", "n_daylight", "inexact_steps", "inexact_fraction",
        "clamped_steps",
    ),
    "study": (
        "condition", "omega", "noise", "n_seeds",
        "ler_crop_mean", "ler_crop_std", "ler_pv_mean", "ler_pv_std", "ler_total_mean", "ler_total_std",
    ),
    "pareto": tuple(PARETO_COLUMNS),
    "shading_fits": tuple(FIT_COLUMNS),
    "hourly_r_squared": ("hour", "mean_r_squared", "min_r_squared", "n_fits"),
    "baselines": ("y_crop_only", "revenue_tracking"),
    "noise_schedule": ("lead", "sigma_dni", "sigma_dhi", "sigma_temperature"),
    "forecast_sample": ("timestamp", "dni", "dhi", "temperature", "true_dni", "true_dhi", "true_temperature"),
}


class RunManifest(BaseModel):
    """What a command ran with and what it wrote."""

    command: str
    config_hash: str
    seeds: List[int] = []
    code_version: str
    schema_version: int
    outputs: List[str] = []
    wall_clock_s: float = Field(ge=0.0)
    created_at: str


class ResultWriter:
    """
    Writes CSV outputs of one command into an output directory.

    Writes are serialized through one instance; every file written is
    recorded for the manifest.
    """

    def __init__(self, out_dir: Union[str, Path]):
        """
        Initialize result writer.

        Args:
            out_dir: Output directory, created if missing
        """
        self.settings = get_settings()
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs: List[Path] = []

    def write_csv(self, name: str, frame: pd.DataFrame, filename: Optional[str] = None) -> Path:
        """
        Write a frame under a registered schema.

        Args:
            name: Schema name in CSV_SCHEMAS
            frame: Data with at least the schema's columns
            filename: File name (``<name>.csv`` when omitted)

        Returns:
            Path written

        Raises:
            DataError: If the frame lacks schema columns
        """
        columns = list(CSV_SCHEMAS[name])
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise DataError(f"'{name}' output is missing columns {missing}")

        out = frame[columns].copy()
        if "timestamp" in out.columns:
            out["timestamp"] = pd.to_datetime(out["timestamp"]).dt.strftime("%Y-%m-%dT%H:%M:%S")

        path = self.out_dir / (filename or f"{name}.csv")
        out.to_csv(path, index=False, float_format=self.settings.csv_float_format, lineterminator="\n")
        self.outputs.append(path)
        logger.debug("wrote %s (%d rows)", path, len(out))
        return path

    def write_season(self, result: SeasonResult, prefix: str = "") -> List[Path]:
        """
        Write the decisions, power, PAR, daily crop and summary files of a run.

        Args:
            result: Season result
            prefix: File name prefix for runs sharing a directory

        Returns:
            Paths written
        """
        return [
            self.write_csv("decisions", result.steps, f"{prefix}decisions.csv"),
            self.write_csv("power", result.steps, f"{prefix}power.csv"),
            self.write_csv("par", result.steps, f"{prefix}par.csv"),
            self.write_csv("daily_crop", result.daily, f"{prefix}daily_crop.csv"),
            self.write_csv("summary", pd.DataFrame([result.summary()]), f"{prefix}summary.csv"),
        ]

    def write_manifest(
        self,
        command: str,
        config_hash: str,
        seeds: Sequence[int],
        wall_clock_s: float
    ) -> Path:
        """
        Write ``manifest.json`` listing every file this writer produced.

        Returns:
            Manifest path
        """
        manifest = RunManifest(
            command=command,
            config_hash=config_hash,
            seeds=list(seeds),
            code_version=self.settings.app_version,
            schema_version=self.settings.csv_schema_version,
            outputs=[str(p) for p in self.outputs],
            wall_clock_s=wall_clock_s,
            created_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        )
        path = self.out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(mode="json"), f, indent=2)
            f.write("\n")
        return path


def read_manifest(path: Union[str, Path]) -> RunManifest:
    """Load a manifest written by :meth:`ResultWriter.write_manifest`."""
    with open(path, "r", encoding="utf-8") as f:
        return RunManifest.model_validate(json.load(f))
