import unittest
import os
import sys
from unittest.mock import patch

# Add the project root to the Python path so we can import modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from modules.error_analytics import ErrorTracker
from modules.error_handler import (
    ErrorSeverity, ErrorCategory, StandardError, ErrorHandler, handle_errors,
    InvalidConfigError, MalformedSequenceError, MelodyParseError, UndefinedMetricError,
    UnsupportedFormatError,
)


class TestErrorHandling(unittest.TestCase):
    """Test the error handling functionality."""

    def test_standard_error_creation(self):
        """Test creating StandardError instances."""
        error = StandardError(
            message="Test error message",
            severity=ErrorSeverity.MEDIUM,
            category=ErrorCategory.GENERAL
        )

        self.assertEqual(error.message, "Test error message")
        self.assertEqual(error.severity, ErrorSeverity.MEDIUM)
        self.assertEqual(error.category, ErrorCategory.GENERAL)
        self.assertEqual(error.context, {})
        self.assertIsNone(error.original_exception)

        # With context and a wrapped exception
        context = {"source": "train.jsonl", "line": 3}
        original_exception = ValueError("Original error")
        error = StandardError(
            message="Test error with context",
            severity=ErrorSeverity.HIGH,
            category=ErrorCategory.PARSING,
            context=context,
            original_exception=original_exception
        )

        self.assertEqual(error.context, context)
        self.assertEqual(error.original_exception, original_exception)
        self.assertIn("Caused by: ValueError", str(error))
        self.assertEqual(error.to_dict()["original_exception"]["type"], "ValueError")

    def test_subclass_defaults(self):
        self.assertEqual(InvalidConfigError("x").severity, ErrorSeverity.HIGH)
        self.assertEqual(InvalidConfigError("x").category, ErrorCategory.CONFIG)
        self.assertEqual(UndefinedMetricError("x").severity, ErrorSeverity.LOW)
        self.assertEqual(UnsupportedFormatError("x").category, ErrorCategory.PARSING)
        self.assertEqual(MalformedSequenceError("x", context={"index": 4}).index, 4)
        error = MelodyParseError("x", context={"line": 7, "byte_offset": 22})
        self.assertEqual((error.line, error.byte_offset), (7, 22))

    def test_error_handler_create_error(self):
        """Test ErrorHandler.create_error static method."""
        original_error = ValueError("Original error")
        error = ErrorHandler.create_error(
            message="Encoding failed",
            severity=ErrorSeverity.HIGH,
            category=ErrorCategory.SEQUENCE,
            context={"index": 12},
            original_exception=original_error
        )

        self.assertIsInstance(error, StandardError)
        self.assertEqual(error.message, "Encoding failed")
        self.assertEqual(error.context.get("index"), 12)
        self.assertEqual(error.original_exception, original_error)

    def test_format_error_message(self):
        """Test ErrorHandler.format_error_message static method."""
        error = StandardError(
            message="Test error",
            severity=ErrorSeverity.MEDIUM,
            category=ErrorCategory.GENERAL,
            context={"source": "a.mid", "byte_offset": 14}
        )

        error_message = ErrorHandler.format_error_message(error)

        self.assertIn("Test error", error_message)
        self.assertIn("general", error_message.lower())
        self.assertIn("medium", error_message.lower())
        self.assertIn("byte_offset=14", error_message)

        error_message = ErrorHandler.format_error_message(KeyError("d99"), prefix="Fatal")
        self.assertTrue(error_message.startswith("Fatal"))
        self.assertIn("type=KeyError", error_message)

    def test_to_standard_error(self):
        wrapped = ErrorHandler.to_standard_error(FileNotFoundError("missing"), {"source": "x"})
        self.assertEqual(wrapped.category, ErrorCategory.RESOURCE)
        self.assertEqual(wrapped.context, {"source": "x"})

        own = MelodyParseError("bad", context={"line": 2})
        self.assertIs(ErrorHandler.to_standard_error(own, {"source": "y", "line": 9}), own)
        self.assertEqual(own.context, {"line": 2, "source": "y"})

    def test_handle_error_tracks(self):
        tracker = ErrorTracker()
        result = ErrorHandler.handle_error(ValueError("bad value"), {"source": "m.jsonl"}, tracker=tracker)
        self.assertEqual(result.category, ErrorCategory.INPUT)
        self.assertEqual(tracker.get_error_summary()["total_errors"], 1)

    def test_handle_error_propagates(self):
        with self.assertRaises(InvalidConfigError):
            ErrorHandler.handle_error(InvalidConfigError("bad pr"), tracker=ErrorTracker(), propagate=True)

    def test_handle_errors_decorator(self):
        """Errors raised by a command become its exit code."""
        @handle_errors(exit_code=3)
        def failing_command():
            raise InvalidConfigError("PR must divide 4 x DR")

        @handle_errors()
        def ok_command():
            return 0

        with patch('modules.error_analytics.error_tracker', ErrorTracker()):
            self.assertEqual(failing_command(), 3)
        self.assertEqual(ok_command(), 0)
        self.assertEqual(failing_command.__name__, 'failing_command')


if __name__ == '__main__':
    unittest.main()
