"""Shared logging and error utilities."""

from .errors import (
    BadCellError,
    ConfigError,
    CorrespondenceGapError,
    ErrorSeverity,
    ExportError,
    InvalidHorizonError,
    ModelValidationError,
    NegativeEntryError,
    NonFiniteError,
    SupportMismatchError,
    TerminalStateError,
    TomSimError,
    ZeroMassError,
)
from .logger import TomSimLogger

__all__ = [
    "BadCellError",
    "ConfigError",
    "CorrespondenceGapError",
    "ErrorSeverity",
    "ExportError",
    "InvalidHorizonError",
    "ModelValidationError",
    "NegativeEntryError",
    "NonFiniteError",
    "SupportMismatchError",
    "TerminalStateError",
    "TomSimError",
    "TomSimLogger",
    "ZeroMassError",
]
