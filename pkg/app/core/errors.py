"""Exception hierarchy shared by every simulator layer.

Each error carries a human readable ``detail`` and the process exit code the
command line maps it to.
"""
from __future__ import annotations

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFICATION = 3
EXIT_DECODE = 4


class ShufflecastError(Exception):
    """Base class for all simulator errors."""

    exit_code: int = 1

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail


class ConfigError(ShufflecastError):
    """Scenario parameters violate a model invariant."""

    exit_code = EXIT_CONFIG


class MuOutOfRange(ConfigError):
    """Storage fraction outside [1/K, 1]."""


class DivisibilityViolation(ConfigError):
    """File count incompatible with the requested placement."""

    def __init__(self, detail: str, suggested_files: int | None = None) -> None:
        super().__init__(detail)
        self.suggested_files = suggested_files


class ZeroSize(ConfigError):
    """A count or bit width is not positive."""


class SimulationLimitExceeded(ConfigError):
    """Scenario too large for bit-level simulation."""


class ConfigFileError(ConfigError):
    """Config file missing or malformed."""


class EmptyAvailableSet(ShufflecastError):
    exit_code = EXIT_CONFIG


class AnalysisError(ShufflecastError):
    exit_code = EXIT_CONFIG


class LostFilesPresent(AnalysisError):
    """Bound requested on a histogram that still counts unstored files."""


class VerificationError(ShufflecastError):
    """Distributed result disagrees with the single-node reference."""

    exit_code = EXIT_VERIFICATION


class MissingValue(VerificationError):
    def __init__(self, file_index: int, user: int | None = None) -> None:
        where = f" at user {user}" if user is not None else ""
        super().__init__(f"Intermediate value for file {file_index} missing{where}.")
        self.file_index = file_index
        self.user = user


class OutputMismatch(VerificationError):
    def __init__(self, users: list[int]) -> None:
        super().__init__(f"Reduce output differs from the oracle for users {users}.")
        self.users = users


class DecodeError(ShufflecastError):
    """Shuffle payloads could not be decoded."""

    exit_code = EXIT_DECODE


class SingularMatrix(DecodeError):
    pass


class InconsistentLengths(DecodeError):
    pass


class MissingSegment(DecodeError):
    pass


class RetryLimitExceeded(DecodeError):
    def __init__(self, attempts: int) -> None:
        super().__init__(f"No acceptable coefficient matrix after {attempts} attempts.")
        self.attempts = attempts


class FieldError(ShufflecastError):
    exit_code = EXIT_DECODE


class DivideByZero(FieldError):
    def __init__(self) -> None:
        super().__init__("Zero has no multiplicative inverse in GF(256).")


class SizeExceedsField(FieldError):
    pass


__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_VERIFICATION",
    "EXIT_DECODE",
    "ShufflecastError",
    "ConfigError",
    "MuOutOfRange",
    "DivisibilityViolation",
    "ZeroSize",
    "SimulationLimitExceeded",
    "ConfigFileError",
    "EmptyAvailableSet",
    "AnalysisError",
    "LostFilesPresent",
    "VerificationError",
    "MissingValue",
    "OutputMismatch",
    "DecodeError",
    "SingularMatrix",
    "InconsistentLengths",
    "MissingSegment",
    "RetryLimitExceeded",
    "FieldError",
    "DivideByZero",
    "SizeExceedsField",
]
