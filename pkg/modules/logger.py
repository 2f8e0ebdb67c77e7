import os
import sys
import logging
from logging.handlers import RotatingFileHandler
from typing import Tuple
from datetime import datetime

from modules.const import Config, TIMEZONE, LOG_DIR

CONTEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(source)s - %(message)s'


def ensure_log_directory() -> bool:
    """Ensure the log directory exists and is writable."""
    try:
        os.makedirs(LOG_DIR, exist_ok=True)
        test_log_path = os.path.join(LOG_DIR, 'test.log')
        with open(test_log_path, 'w') as f:
            f.write('Test log write\n')
        os.remove(test_log_path)
        return True
    except OSError as e:
        print(f"Error setting up log directory {LOG_DIR}: {e}", file=sys.stderr)
        return False


class TimezoneFormatter(logging.Formatter):
    """Formatter that stamps records in the configured timezone"""
    def formatTime(self, record, datefmt=None):
        dt = datetime.fromtimestamp(record.created).astimezone(TIMEZONE)
        return dt.strftime(datefmt) if datefmt else dt.strftime("%Y-%m-%d %H:%M:%S %z")


class ContextFormatter(TimezoneFormatter):
    """Adds the record source (file:line) when the caller supplied one."""
    def format(self, record):
        record.source = getattr(record, 'source', 'N/A')
        return super().format(record)


def _file_handler(name: str, formatter: logging.Formatter) -> RotatingFileHandler:
    handler = RotatingFileHandler(
        os.path.join(LOG_DIR, f'{name}.log'),
        maxBytes=5*1024*1024,
        backupCount=3,
        encoding='utf-8'
    )
    handler.setFormatter(formatter)
    return handler


def _build_logger(name: str, level: int, console: logging.Handler,
                  file_name: str, with_files: bool) -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(level)
    # Re-initialisation (e.g. module reload in tests) must not stack handlers
    logger.handlers.clear()
    logger.addHandler(console)
    if with_files:
        logger.addHandler(_file_handler(file_name, ContextFormatter(CONTEXT_FORMAT)))
    logger.propagate = False
    return logger


def initialize_logging() -> Tuple[logging.Logger, logging.Logger, logging.Logger]:
    """Set up all loggers and handlers"""
    level = getattr(logging, Config.LOG_LEVEL, logging.INFO)
    with_files = Config.LOG_TO_FILE and ensure_log_directory()

    # Console goes to stderr; stdout is reserved for command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(ContextFormatter(CONTEXT_FORMAT))

    general_logger = _build_logger('general_logger', level, console_handler, 'general', with_files)
    error_logger = _build_logger('error_logger', logging.WARNING, console_handler, 'error', with_files)
    analytics_logger = _build_logger('analytics_logger', level, console_handler, 'analytics', with_files)

    if with_files:
        general_logger.debug(f"Log files are being written to: {LOG_DIR}")

    return general_logger, error_logger, analytics_logger


# Initialize logging when this module is imported
general_logger, error_logger, analytics_logger = initialize_logging()
