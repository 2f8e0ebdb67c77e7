import functools
import traceback
from enum import Enum
from typing import Dict, Optional, Any, Type, Callable
from datetime import datetime

from modules.const import TIMEZONE
from modules.logger import error_logger


class ErrorSeverity(Enum):
    """Error severity levels for categorizing errors"""

    LOW = "low"  # Record skipped, run continues
    MEDIUM = "medium"  # Record-level failure, affects the exit code
    HIGH = "high"  # Command cannot produce its output
    CRITICAL = "critical"  # Unexpected failure


class ErrorCategory(Enum):
    """Categories for classifying different types of errors"""

    CONFIG = "config"  # Invalid encoding hyper-parameters
    PARSING = "parsing"  # Melody/token/MIDI file format errors
    INPUT = "input"  # Invalid records (duplicate ids, bad values)
    RANGE = "range"  # Pitch or transposition out of range
    LOOKUP = "lookup"  # Unknown token text or id
    SEQUENCE = "sequence"  # Malformed token sequence
    METRIC = "metric"  # Metric undefined for a melody
    STATISTICS = "statistics"  # Degenerate samples, insufficient pairs
    RESOURCE = "resource"  # Unreadable/unwritable files
    GENERAL = "general"  # Uncategorized errors


class StandardError(Exception):
    """
    Standard error class for consistent handling across the application.

    Attributes:
        message: Primary error message
        severity: Error severity level
        category: Error category
        context: Additional contextual information (source, line, byte_offset, ...)
        original_exception: The original exception that was caught
    """

    default_severity: ErrorSeverity = ErrorSeverity.MEDIUM
    default_category: ErrorCategory = ErrorCategory.GENERAL

    def __init__(
        self,
        message: str,
        severity: Optional[ErrorSeverity] = None,
        category: Optional[ErrorCategory] = None,
        context: Optional[Dict[str, Any]] = None,
        original_exception: Optional[Exception] = None,
    ):
        self.message = message
        self.severity = severity or self.default_severity
        self.category = category or self.default_category
        self.context = context or {}
        self.original_exception = original_exception
        self.timestamp = datetime.now(TIMEZONE)

        formatted_message = f"{message}"
        if original_exception:
            formatted_message += f" | Original error: {str(original_exception)[:50]}"

        super().__init__(formatted_message)

    def __str__(self):
        """String representation of the error"""
        base = f"[{self.severity.value.upper()}] {self.category.value}: {self.message}"
        if self.original_exception:
            exc_name = type(self.original_exception).__name__
            exc_msg = str(self.original_exception)
            base += f" (Caused by: {exc_name}: {exc_msg})"
        return base

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for logging or serialization"""
        result = {
            "message": self.message,
            "severity": self.severity.value,
            "category": self.category.value,
            "timestamp": self.timestamp.isoformat(),
            "context": self.context,
        }

        if self.original_exception:
            result["original_exception"] = {
                "type": type(self.original_exception).__name__,
                "message": str(self.original_exception),
            }

        return result


class InvalidConfigError(StandardError):
    default_category = ErrorCategory.CONFIG
    default_severity = ErrorSeverity.HIGH


class OutOfRangeError(StandardError):
    default_category = ErrorCategory.RANGE


class TokenLookupError(StandardError):
    default_category = ErrorCategory.LOOKUP


class MalformedSequenceError(StandardError):
    """Token sequence grammar violation; context carries the token index."""
    default_category = ErrorCategory.SEQUENCE

    @property
    def index(self) -> Optional[int]:
        return self.context.get("index")


class UndefinedMetricError(StandardError):
    default_category = ErrorCategory.METRIC
    default_severity = ErrorSeverity.LOW


class DegenerateDistributionError(StandardError):
    default_category = ErrorCategory.STATISTICS
    default_severity = ErrorSeverity.LOW


class InsufficientDataError(StandardError):
    default_category = ErrorCategory.STATISTICS
    default_severity = ErrorSeverity.LOW


class MelodyParseError(StandardError):
    """Parse failure; context carries `line` (text formats) or `byte_offset` (SMF)."""
    default_category = ErrorCategory.PARSING

    @property
    def line(self) -> Optional[int]:
        return self.context.get("line")

    @property
    def byte_offset(self) -> Optional[int]:
        return self.context.get("byte_offset")


class UnsupportedFormatError(StandardError):
    default_category = ErrorCategory.PARSING
    default_severity = ErrorSeverity.HIGH


class DuplicateIdError(StandardError):
    default_category = ErrorCategory.INPUT


class ErrorHandler:
    """
    Central error handler for managing error processing and logging.

    Every record-level failure goes through `handle_error` so it is logged
    once and counted by the error tracker that decides the exit code.
    """

    # Mapping from Python exception types to our error categories
    DEFAULT_EXCEPTION_MAPPING: Dict[Type[Exception], ErrorCategory] = {
        PermissionError: ErrorCategory.RESOURCE,
        FileNotFoundError: ErrorCategory.RESOURCE,
        IsADirectoryError: ErrorCategory.RESOURCE,
        KeyError: ErrorCategory.LOOKUP,
        ValueError: ErrorCategory.INPUT,
        TypeError: ErrorCategory.PARSING,
        EOFError: ErrorCategory.PARSING,
    }

    @staticmethod
    def format_error_message(
        error: Exception,
        prefix: Optional[str] = None,
        include_traceback: bool = False,
    ) -> str:
        """
        Format an error message with consistent structure for logging.

        Args:
            error: The error to format
            prefix: Optional prefix text
            include_traceback: Append the active traceback (unexpected errors)

        Returns:
            Formatted error message string
        """
        parts = [prefix or "Error"]

        if isinstance(error, StandardError):
            parts.append(f"type={error.category.value}")
            parts.append(f"severity={error.severity.value}")
            parts.append(f"message={error.message}")
            for key, value in error.context.items():
                parts.append(f"{key}={value}")
        else:
            parts.append(f"type={type(error).__name__}")
            parts.append(f"message={str(error)}")

        message = " | ".join(parts)
        if include_traceback:
            tb = traceback.format_exc()
            if tb and tb != "NoneType: None\n":
                message += f"\n{tb}"
        return message

    @staticmethod
    def to_standard_error(
        error: Exception, context_data: Optional[Dict[str, Any]] = None
    ) -> StandardError:
        """Wrap a foreign exception in a StandardError (identity for StandardError)."""
        if isinstance(error, StandardError):
            if context_data:
                for key, value in context_data.items():
                    error.context.setdefault(key, value)
            return error
        category = ErrorHandler.DEFAULT_EXCEPTION_MAPPING.get(
            type(error), ErrorCategory.GENERAL
        )
        return StandardError(
            message=str(error),
            category=category,
            context=dict(context_data or {}),
            original_exception=error,
        )

    @staticmethod
    def handle_error(
        error: Exception,
        context_data: Optional[Dict[str, Any]] = None,
        tracker: Optional[Any] = None,
        propagate: bool = False,
    ) -> StandardError:
        """Handle an exception with consistent logging and tracking.

        Args:
            error: The exception to handle
            context_data: Additional context data to include with the error
            tracker: ErrorTracker to record into (defaults to the global one)
            propagate: Whether to re-raise the exception after handling

        Returns:
            StandardError: The standardized error object

        Raises:
            Exception: The original exception if propagate is True
        """
        # Imported here to avoid circular imports
        from modules.error_analytics import track_error

        std_error = ErrorHandler.to_standard_error(error, context_data)
        unexpected = not isinstance(error, StandardError)

        error_message = ErrorHandler.format_error_message(
            std_error, include_traceback=unexpected
        )
        source = std_error.context.get("source")
        line = std_error.context.get("line")
        extra = {"source": f"{source}:{line}" if source and line else (source or "N/A")}
        if std_error.severity in (ErrorSeverity.HIGH, ErrorSeverity.CRITICAL):
            error_logger.error(error_message, extra=extra)
        else:
            error_logger.warning(error_message, extra=extra)

        try:
            track_error(std_error, tracker=tracker)
        except Exception as e:
            error_logger.error(f"Failed to track error: {e}")

        if propagate:
            raise error

        return std_error

    @staticmethod
    def create_error(
        message: str,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        category: ErrorCategory = ErrorCategory.GENERAL,
        context: Optional[Dict[str, Any]] = None,
        original_exception: Optional[Exception] = None,
    ) -> StandardError:
        """
        Create a new StandardError instance.

        Args:
            message: Error message
            severity: Error severity level
            category: Error category
            context: Additional contextual information
            original_exception: Original exception if wrapping

        Returns:
            StandardError: The newly created error object
        """
        return StandardError(
            message=message,
            severity=severity,
            category=category,
            context=context,
            original_exception=original_exception,
        )


def handle_errors(exit_code: int = 1, context_data: Optional[Dict[str, Any]] = None):
    """Decorator for command handlers: errors are logged and become an exit code.

    Args:
        exit_code: Exit code returned when the wrapped command raises
        context_data: Additional context data to include with the error

    Returns:
        Decorated function
    """

    def decorator(func: Callable[..., int]) -> Callable[..., int]:
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                return func(*args, **kwargs)
            except Exception as e:
                error_context = context_data or {"command": func.__name__}
                ErrorHandler.handle_error(e, context_data=error_context)
                return exit_code

        return wrapper

    return decorator
