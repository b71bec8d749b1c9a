"""
Exception hierarchy and process exit codes for the onionlabel pipeline.

Library code raises these exceptions; the CLI tools translate them into the
stable exit codes defined by ``ExitCode``.
"""

from enum import IntEnum
from typing import Optional


class ExitCode(IntEnum):
    """Stable process exit codes shared by every CLI tool."""

    OK = 0
    FAILURE = 1
    USAGE = 2
    DATA = 3
    TRAINING = 4
    SCHEMA_MISMATCH = 5


class OnionLabelError(Exception):
    """Base class for all pipeline errors."""

    exit_code = ExitCode.FAILURE


class ConfigError(OnionLabelError):
    """Invalid or unreadable configuration."""

    exit_code = ExitCode.USAGE


class DataError(OnionLabelError):
    """Malformed input data (feature CSV, session log, dataset invariants)."""

    exit_code = ExitCode.DATA

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class SchemaMismatchError(OnionLabelError):
    """Model and data disagree on the feature schema."""

    exit_code = ExitCode.SCHEMA_MISMATCH


class TrainingError(OnionLabelError):
    """A model could not be fitted."""

    exit_code = ExitCode.TRAINING


class ExplainError(OnionLabelError):
    """An attribution request cannot be served (e.g. too many features for exact)."""

    exit_code = ExitCode.USAGE


def exit_code_for(exc: BaseException) -> int:
    """Map an exception raised by library code to a process exit code."""
    if isinstance(exc, OnionLabelError):
        return int(exc.exit_code)
    if isinstance(exc, (FileNotFoundError, PermissionError)):
        return int(ExitCode.DATA)
    return int(ExitCode.FAILURE)
