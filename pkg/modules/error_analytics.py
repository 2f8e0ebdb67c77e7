"""
Error analytics module for tracking record-level diagnostics of a run.

Every failure routed through ErrorHandler.handle_error ends up here, so a
command can decide its exit code and print a per-category summary.
"""

import json
from collections import defaultdict
from dataclasses import dataclass, field, asdict
from datetime import datetime
from threading import Lock
from typing import Dict, List, Optional, Any
import logging

from modules.error_handler import StandardError, ErrorSeverity
from modules.const import TIMEZONE

MAX_HISTORY_ENTRIES = 1000  # Maximum number of diagnostics kept per run

analytics_logger = logging.getLogger('analytics_logger')


@dataclass
class Diagnostic:
    """One record-level problem, as reported to the user."""
    message: str
    category: str
    severity: str
    source: Optional[str] = None
    line: Optional[int] = None
    byte_offset: Optional[int] = None
    context: Dict[str, Any] = field(default_factory=dict)
    timestamp: str = ""

    @classmethod
    def from_error(cls, error: StandardError) -> "Diagnostic":
        context = {
            key: value for key, value in error.context.items()
            if key not in ("source", "line", "byte_offset")
        }
        return cls(
            message=error.message,
            category=error.category.value,
            severity=error.severity.value,
            source=error.context.get("source"),
            line=error.context.get("line"),
            byte_offset=error.context.get("byte_offset"),
            context=context,
            timestamp=error.timestamp.isoformat(),
        )

    def location(self) -> str:
        """`source:line` / `source@offset` rendering used in summaries."""
        where = self.source or "<input>"
        if self.line is not None:
            return f"{where}:{self.line}"
        if self.byte_offset is not None:
            return f"{where}@{self.byte_offset}"
        return where


class ErrorTracker:
    """
    Track and summarise diagnostics for one command run.

    Failures (severity medium and above) make `has_failures` true; low-severity
    entries (skipped metrics, degenerate distributions) are informational.
    """

    def __init__(self):
        self.lock = Lock()
        self.stats: Dict[str, Any] = {}
        self.diagnostics: List[Diagnostic] = []
        self.reset()

    def reset(self) -> None:
        """Clear all statistics (start of a command, or tests)."""
        with self.lock:
            self.stats = {
                "total_errors": 0,
                "by_category": {},
                "by_severity": {},
                "started": datetime.now(TIMEZONE).isoformat(),
            }
            self.diagnostics = []

    def track_error(self, error: StandardError) -> Diagnostic:
        """
        Track an error and update statistics.

        Args:
            error: StandardError instance to track

        Returns:
            The recorded Diagnostic
        """
        diagnostic = Diagnostic.from_error(error)
        with self.lock:
            self.stats["total_errors"] += 1

            category = diagnostic.category
            self.stats["by_category"][category] = self.stats["by_category"].get(category, 0) + 1

            severity = diagnostic.severity
            self.stats["by_severity"][severity] = self.stats["by_severity"].get(severity, 0) + 1

            self.diagnostics.append(diagnostic)
            # Limit history size to avoid memory issues on huge corpora
            if len(self.diagnostics) > MAX_HISTORY_ENTRIES * 2:
                self.diagnostics = self.diagnostics[-MAX_HISTORY_ENTRIES:]
        return diagnostic

    @property
    def failure_count(self) -> int:
        with self.lock:
            by_severity = self.stats["by_severity"]
            return sum(
                by_severity.get(level.value, 0)
                for level in (ErrorSeverity.MEDIUM, ErrorSeverity.HIGH, ErrorSeverity.CRITICAL)
            )

    def has_failures(self) -> bool:
        return self.failure_count > 0

    def common_errors(self, limit: int = 5) -> List[Dict[str, Any]]:
        """Most frequent diagnostic messages."""
        with self.lock:
            message_counts: Dict[str, int] = defaultdict(int)
            for entry in self.diagnostics:
                message_counts[entry.message] += 1
        ranked = sorted(message_counts.items(), key=lambda item: (-item[1], item[0]))
        return [{"message": msg, "count": count} for msg, count in ranked[:limit]]

    def get_error_summary(self) -> Dict[str, Any]:
        """
        Get a summary of error statistics.

        Returns:
            Dictionary with error summary statistics
        """
        with self.lock:
            summary = {
                "total_errors": self.stats["total_errors"],
                "by_category": dict(self.stats["by_category"]),
                "by_severity": dict(self.stats["by_severity"]),
                "started": self.stats["started"],
            }
        summary["common_errors"] = self.common_errors()
        return summary

    def get_recent_errors(self, limit: int = 10) -> List[Diagnostic]:
        """Most recent diagnostics, newest first."""
        with self.lock:
            return self.diagnostics[-limit:][::-1]

    def format_summary(self) -> str:
        """Human-readable summary for the end of a command."""
        summary = self.get_error_summary()
        if not summary["total_errors"]:
            return "No diagnostics."
        lines = [f"Diagnostics: {summary['total_errors']}"]
        for category, count in sorted(summary["by_category"].items()):
            lines.append(f"  {category}: {count}")
        for entry in summary["common_errors"]:
            lines.append(f"  x{entry['count']} {entry['message']}")
        return "\n".join(lines)

    def save(self, path: str) -> None:
        """Dump the summary and diagnostics as JSON."""
        from modules.file_manager import atomic_write_text

        payload = {
            "summary": self.get_error_summary(),
            "diagnostics": [asdict(d) for d in self.diagnostics],
        }
        atomic_write_text(path, json.dumps(payload, indent=2, default=str) + "\n")
        analytics_logger.info(f"Diagnostics report written to {path}")


# Initialize the error tracker
error_tracker = ErrorTracker()


def track_error(error: StandardError, tracker: Optional[ErrorTracker] = None) -> Diagnostic:
    """
    Track an error in the analytics system.

    Args:
        error: StandardError instance to track
        tracker: Tracker to use instead of the global one
    """
    return (tracker or error_tracker).track_error(error)
