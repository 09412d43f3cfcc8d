"""
Exception hierarchy and process exit codes for pulse-features.

Every error raised by the library derives from PulseFeatError and carries the
exit code the CLI reports for it. Recoverable per-beat or per-cell anomalies are
not exceptions; they are recorded as diagnostics (see core.models.Diagnostic).
"""

from __future__ import annotations

from enum import IntEnum


class ExitCode(IntEnum):
    """Stable, documented CLI exit codes."""

    OK = 0
    GENERIC = 1
    USAGE = 2  # argparse reserves 2 for bad invocations
    PARSE = 3
    CONFIG = 4
    INSUFFICIENT_DATA = 5


class PulseFeatError(Exception):
    """Base class for all library errors."""

    exit_code: ExitCode = ExitCode.GENERIC


class InvalidParameterError(PulseFeatError, ValueError):
    """A numeric parameter is outside its valid range (window, order, bins...)."""

    exit_code = ExitCode.CONFIG


class InvalidInputError(PulseFeatError, ValueError):
    """An input array or index range violates an operation's precondition."""


class DegenerateSeriesError(InvalidInputError):
    """A series has zero variance where a spread is required."""


class DataError(PulseFeatError, ValueError):
    """Waveform data is unusable (non-finite samples, inconsistent channels)."""

    exit_code = ExitCode.PARSE


class RecordParseError(DataError):
    """A record file is malformed. Carries the offending path and line number."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        """Store location details and build a message that names them."""
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class ConfigError(PulseFeatError, ValueError):
    """A run or synthetic-record configuration is invalid or infeasible."""

    exit_code = ExitCode.CONFIG


class InsufficientDataError(PulseFeatError):
    """Too few usable beats for the requested analysis."""

    exit_code = ExitCode.INSUFFICIENT_DATA
