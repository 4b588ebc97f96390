"""
Error types and user-facing error messages.

Every exception carries the CLI exit code it maps to, so the command layer can
turn any failure into a one-line message and a stable status.
"""

from enum import IntEnum
from typing import Optional


class ExitCode(IntEnum):
    """CLI exit statuses."""
    SUCCESS = 0
    USAGE = 1
    DATA = 2
    NUMERICAL = 3


class AgrivoltaicError(Exception):
    """Base class for all domain errors."""

    exit_code: ExitCode = ExitCode.NUMERICAL


class ConfigError(AgrivoltaicError):
    """Scenario or command-line configuration is invalid."""

    exit_code = ExitCode.USAGE


class DataError(AgrivoltaicError):
    """Input data is malformed or outside the supported range."""

    exit_code = ExitCode.DATA


class WeatherParseError(DataError):
    """A weather file could not be parsed; names the offending row."""

    def __init__(self, message: str, row: Optional[int] = None, timestamp: Optional[str] = None):
        self.row = row
        self.timestamp = timestamp
        location = []
        if row is not None:
            location.append(f"row {row}")
        if timestamp is not None:
            location.append(f"timestamp {timestamp}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class OutOfRangeError(DataError):
    """A timestamp or time index is outside the supported range."""


class NumericalError(AgrivoltaicError):
    """A numerical step failed."""

    exit_code = ExitCode.NUMERICAL


class ShadingFitError(NumericalError):
    """The affine shading fit could not be computed."""


class ProblemBuildError(NumericalError):
    """The horizon problem could not be assembled."""


class UndefinedLERError(NumericalError):
    """A land equivalent ratio has a zero baseline."""


class SolverError(NumericalError):
    """The conic solver failed to return an optimal point."""


class ErrorMessages:
    """
    Generates user-facing messages for CLI failures.

    Messages name what went wrong and what to check; they never include a
    traceback.
    """

    @staticmethod
    def config_invalid(path: str, reason: str) -> str:
        """
        Message for a scenario file that fails validation.

        Args:
            path: Scenario file path
            reason: Validation failure reason

        Returns:
            User-facing error message
        """
        return (
            f"Scenario '{path}' is invalid: {reason}. "
            f"Check the field against scenarios/desk_season.json."
        )

    @staticmethod
    def config_missing(path: str) -> str:
        """Message for a scenario file that does not exist."""
        return f"Scenario file '{path}' not found."

    @staticmethod
    def weather_invalid(reason: str) -> str:
        """
        Message for weather input that cannot be used.

        Args:
            reason: Parse or validation failure reason

        Returns:
            User-facing error message
        """
        return (
            f"Weather data rejected: {reason}. "
            f"Weather files must be hourly, gap-free and carry non-negative irradiance."
        )

    @staticmethod
    def numerical_failure(reason: str) -> str:
        """Message for a numerical failure."""
        return f"Numerical failure: {reason}."

    @staticmethod
    def bad_argument(argument: str, reason: str) -> str:
        """Message for an invalid command-line argument."""
        return f"Invalid value for {argument}: {reason}."

    @staticmethod
    def generic_error() -> str:
        """Message for unexpected failures."""
        return "Something went wrong while running the scenario. See the audit log for details."


def get_error_message(
    error_type: str,
    **kwargs
) -> str:
    """
    Get the user-facing message for an error type.

    Args:
        error_type: Type of error
        **kwargs: Context for the message

    Returns:
        User-facing error message
    """
    error_messages = ErrorMessages()

    error_map = {
        "config_invalid": error_messages.config_invalid,
        "config_missing": error_messages.config_missing,
        "weather_invalid": error_messages.weather_invalid,
        "numerical": error_messages.numerical_failure,
        "bad_argument": error_messages.bad_argument,
        "generic": error_messages.generic_error
    }

    error_func = error_map.get(error_type, error_messages.generic_error)

    try:
        return error_func(**kwargs)
    except TypeError:
        # kwargs do not match the message signature
        return error_messages.generic_error()


def message_for(error: AgrivoltaicError) -> str:
    """
    Map a raised domain error to its user-facing message.

    Args:
        error: Raised error

    Returns:
        User-facing error message
    """
    if isinstance(error, ConfigError):
        return str(error)
    if isinstance(error, DataError):
        return get_error_message("weather_invalid", reason=str(error))
    return get_error_message("numerical", reason=str(error))
