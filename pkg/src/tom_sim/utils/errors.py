"""
Error Handling Utility Module

Custom exception types for tom-sim. Every error carries a severity and a
context dictionary and logs itself when raised.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

from .logger import TomSimLogger


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class TomSimError(Exception):
    """Base exception for tom-sim errors."""

    def __init__(self, message: str, severity: ErrorSeverity = ErrorSeverity.MEDIUM,
                 context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.severity = severity
        self.context = context or {}
        self._log_error()

    def _log_error(self) -> None:
        """Log the error with appropriate severity level."""
        logger = TomSimLogger('tom_sim.errors')

        log_message = f"{self.__class__.__name__}: {self.message}"
        if self.context:
            log_message += f" Context: {self.context}"

        if self.severity == ErrorSeverity.LOW:
            logger.debug(log_message)
        elif self.severity == ErrorSeverity.MEDIUM:
            logger.info(log_message)
        elif self.severity == ErrorSeverity.HIGH:
            logger.warning(log_message)
        else:  # CRITICAL
            logger.error(log_message)


# --- belief-core -----------------------------------------------------------

class ZeroMassError(TomSimError):
    """Raised when a distribution to be normalized has no mass."""

    def __init__(self, where: str, factor: Optional[int] = None):
        context = {'where': where, 'factor': factor}
        message = f"Zero probability mass in {where}"
        if factor is not None:
            message += f" (factor {factor})"
        super().__init__(message, ErrorSeverity.LOW, context)


class NegativeEntryError(TomSimError):
    """Raised when a probability vector has a negative entry."""

    def __init__(self, where: str, minimum: float):
        context = {'where': where, 'minimum': minimum}
        super().__init__(f"Negative entry {minimum!r} in {where}",
                         ErrorSeverity.MEDIUM, context)


class NonFiniteError(TomSimError):
    """Raised when values contain NaN or infinities that cannot be mapped."""

    def __init__(self, where: str, values: Sequence[float]):
        context = {'where': where, 'values': [float(v) for v in values]}
        super().__init__(f"Non-finite values in {where}", ErrorSeverity.MEDIUM, context)


class NormalizationError(TomSimError):
    """Raised when a probability vector does not sum to one."""

    def __init__(self, where: str, total: float):
        context = {'where': where, 'total': total}
        super().__init__(f"Entries of {where} sum to {total!r}, not 1",
                         ErrorSeverity.MEDIUM, context)


class SupportMismatchError(TomSimError):
    """Raised when two distributions or a table and a belief disagree in size."""

    def __init__(self, where: str, expected: Any, actual: Any):
        context = {'where': where, 'expected': expected, 'actual': actual}
        super().__init__(f"Support mismatch in {where}: expected {expected}, got {actual}",
                         ErrorSeverity.MEDIUM, context)


# --- generative models ---------------------------------------------------

class BadCellError(TomSimError):
    """Raised for a cell index outside the grid."""

    def __init__(self, cell: Any, cell_count: int):
        context = {'cell': cell, 'cell_count': cell_count}
        super().__init__(f"Cell {cell!r} outside 1..{cell_count}",
                         ErrorSeverity.HIGH, context)


class ModelValidationError(TomSimError):
    """Raised when a generative model fails validation."""

    def __init__(self, model_name: str, violations: List[str]):
        context = {'model': model_name, 'violations': violations}
        message = f"Model '{model_name}' is malformed: {'; '.join(violations)}"
        super().__init__(message, ErrorSeverity.HIGH, context)
        self.violations = violations


# --- planners --------------------------------------------------------------

class InvalidHorizonError(TomSimError):
    """Raised when a planner is asked for a horizon below one."""

    def __init__(self, horizon: Any):
        super().__init__(f"Planning horizon must be >= 1, got {horizon!r}",
                         ErrorSeverity.HIGH, {'horizon': horizon})


class CorrespondenceGapError(TomSimError):
    """Raised when a factor needed across perspectives has no mapping."""

    def __init__(self, factor_name: str, perspective: str):
        context = {'factor': factor_name, 'perspective': perspective}
        message = f"No correspondence for {perspective} factor '{factor_name}'"
        super().__init__(message, ErrorSeverity.HIGH, context)


# --- environment -----------------------------------------------------------

class TerminalStateError(TomSimError):
    """Raised when stepping an episode that has already finished."""

    def __init__(self, task: str, step: int):
        super().__init__(f"Cannot step terminal {task} state at step {step}",
                         ErrorSeverity.MEDIUM, {'task': task, 'step': step})


# --- harness ---------------------------------------------------------------

class ConfigError(TomSimError):
    """Exception for configuration-related errors."""

    def __init__(self, config_type: str, invalid_values: List[str],
                 config_path: Optional[str] = None):
        context = {
            'config_type': config_type,
            'invalid_values': invalid_values,
            'config_path': config_path,
        }
        message = f"Configuration error in {config_type}: {', '.join(invalid_values)}"
        super().__init__(message, ErrorSeverity.HIGH, context)
        self.invalid_values = invalid_values


class ExportError(TomSimError):
    """Exception for failures writing or parsing exported files."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Export to {path} failed: {reason}", ErrorSeverity.HIGH,
                         {'path': path, 'reason': reason})
