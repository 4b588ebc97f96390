"""
Audit logging for scenario runs.

Logs every command, configuration hash, seed, horizon solve and day advance as
one JSON object per line so that runs can be audited after the fact.
"""

import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from pythonjsonlogger import jsonlogger


class AuditLogger:
    """
    Centralized audit logger for scenario runs.

    Logs include:
    - Command, config hash and seeds of each run
    - Shading fit summaries
    - Horizon solves (step count, inexact steps)
    - Daily crop state advances
    - Validation failures and other system events
    """

    def __init__(self, log_path: Optional[str] = "logs/audit.log", log_level: str = "INFO"):
        """
        Initialize audit logger.

        Args:
            log_path: Path to audit log file; None or "" logs to stderr only
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        """
        self.logger = logging.getLogger("agripv.audit")
        self.logger.setLevel(getattr(logging, log_level.upper()))
        self.logger.propagate = False

        # Remove existing handlers to avoid duplicates
        self.logger.handlers.clear()

        formatter = jsonlogger.JsonFormatter(
            "%(asctime)s %(levelname)s %(message)s",
            rename_fields={"asctime": "timestamp", "levelname": "level"},
            datefmt="%Y-%m-%dT%H:%M:%S"
        )

        if log_path:
            self.log_path = Path(log_path)
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(self.log_path)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)
        else:
            self.log_path = None

        # Console handler on stderr keeps stdout free for summary lines
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.WARNING)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

    def log_run_started(
        self,
        command: str,
        config_hash: str,
        seeds: List[int],
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """
        Log the start of a command.

        Args:
            command: CLI command name
            config_hash: Stable hash of the scenario configuration
            seeds: Seeds the command will use
            details: Extra context (mode, omega, jobs)
        """
        self.logger.info("run_started", extra={
            "event": "run_started",
            "command": command,
            "config_hash": config_hash,
            "seeds": seeds,
            "details": details or {}
        })

    def log_run_completed(
        self,
        command: str,
        config_hash: str,
        wall_clock_s: float,
        summary: Optional[Dict[str, Any]] = None
    ) -> None:
        """
        Log the end of a command.

        Args:
            command: CLI command name
            config_hash: Stable hash of the scenario configuration
            wall_clock_s: Elapsed wall-clock time in seconds
            summary: Headline results (LERs, row counts)
        """
        self.logger.info("run_completed", extra={
            "event": "run_completed",
            "command": command,
            "config_hash": config_hash,
            "wall_clock_s": round(wall_clock_s, 3),
            "summary": summary or {}
        })

    def log_shading_fits(
        self,
        n_fits: int,
        mean_r_squared: float,
        worst_residual: float,
        monotonicity_violations: int
    ) -> None:
        """
        Log a completed batch of shading fits.

        Args:
            n_fits: Number of per-step fits
            mean_r_squared: Mean R^2 over the fits
            worst_residual: Largest absolute residual over all fits
            monotonicity_violations: Sweep points where shading grew away from tracking
        """
        self.logger.info("shading_fits_computed", extra={
            "event": "shading_fits_computed",
            "n_fits": n_fits,
            "mean_r_squared": mean_r_squared,
            "worst_residual": worst_residual,
            "monotonicity_violations": monotonicity_violations
        })

    def log_horizon_solved(
        self,
        t0: int,
        n_steps: int,
        inexact_steps: int,
        objective: float
    ) -> None:
        """
        Log one horizon solve.

        Args:
            t0: First step of the horizon
            n_steps: Number of daylight decision steps
            inexact_steps: Steps where the cone relaxation was not tight
            objective: Optimal objective value
        """
        self.logger.debug("horizon_solved", extra={
            "event": "horizon_solved",
            "t0": t0,
            "n_steps": n_steps,
            "inexact_steps": inexact_steps,
            "objective": objective
        })

    def log_day_advanced(
        self,
        day: int,
        hui: float,
        lai: float,
        biomass: float
    ) -> None:
        """
        Log the daily crop state update.

        Args:
            day: Day index
            hui: Heat unit index after the day
            lai: Leaf area index after the day
            biomass: Cumulative biomass (t/ha)
        """
        self.logger.debug("day_advanced", extra={
            "event": "day_advanced",
            "day": day,
            "hui": hui,
            "lai": lai,
            "biomass": biomass
        })

    def log_validation_failure(
        self,
        source: str,
        validation_type: str,
        reason: str
    ) -> None:
        """
        Log a validation failure event.

        Args:
            source: File or object that failed validation
            validation_type: Kind of validation (schema, weather, argument)
            reason: Reason for validation failure
        """
        self.logger.warning("validation_failure", extra={
            "event": "validation_failure",
            "source": source,
            "validation_type": validation_type,
            "reason": reason
        })

    def log_system_event(
        self,
        event_type: str,
        details: Dict[str, Any]
    ) -> None:
        """
        Log general system events.

        Args:
            event_type: Type of system event
            details: Event details
        """
        self.logger.info("system_event", extra={
            "event": "system_event",
            "event_type": event_type,
            "details": details,
            "logged_at": datetime.now(timezone.utc).isoformat()
        })


# Global audit logger instance
_audit_logger: Optional[AuditLogger] = None


def get_audit_logger(log_path: Optional[str] = None, log_level: Optional[str] = None) -> AuditLogger:
    """
    Get or create the global audit logger instance.

    Args:
        log_path: Path to audit log file (default from settings)
        log_level: Logging level (default from settings)

    Returns:
        AuditLogger instance
    """
    global _audit_logger
    if _audit_logger is None:
        from config.settings import get_settings

        settings = get_settings()
        _audit_logger = AuditLogger(
            log_path=settings.audit_log_path if log_path is None else log_path,
            log_level=log_level or settings.log_level
        )
    return _audit_logger
