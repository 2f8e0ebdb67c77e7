"""
Constants and configuration settings for melodytok.
"""
import os
from typing import FrozenSet, Tuple
from dotenv import load_dotenv
import pytz

# Load environment variables
load_dotenv()

# Base directories
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
LOG_DIR = os.getenv('MELODYTOK_LOG_DIR', os.path.join(PROJECT_ROOT, 'logs'))


def _env_flag(name: str, default: str = '0') -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    """Runtime settings read from the environment (logging only)."""
    LOG_DIR: str = LOG_DIR
    LOG_LEVEL: str = os.getenv('MELODYTOK_LOG_LEVEL', 'INFO').upper()
    LOG_TO_FILE: bool = _env_flag('MELODYTOK_LOG_TO_FILE')
    TIMEZONE: str = os.getenv('MELODYTOK_TIMEZONE', 'UTC')


try:
    TIMEZONE = pytz.timezone(Config.TIMEZONE)
except pytz.UnknownTimeZoneError:
    TIMEZONE = pytz.utc


class Tokens:
    """Canonical token spellings."""
    PAD: str = 'PAD'
    BAR: str = 'BAR'
    POS: str = 'POS'
    REST: str = 'REST'
    PITCH_PREFIX: str = 'p'
    OCTAVE_PREFIX: str = 'o'
    DURATION_PREFIX: str = 'd'
    PITCH_CLASSES: Tuple[str, ...] = (
        'C', 'Db', 'D', 'Eb', 'E', 'F', 'Gb', 'G', 'Ab', 'A', 'Bb', 'B'
    )
    OCTAVE_COUNT: int = 11  # floor(127 / 12) + 1


class Grid:
    """Metric grid and resolution settings."""
    BEATS_PER_BAR: int = 4
    DURATION_RESOLUTIONS: FrozenSet[int] = frozenset({4, 8, 12, 16})
    POSITION_RESOLUTIONS: FrozenSet[int] = frozenset({0, 1, 4, 8, 12, 16, 32, 48, 64})
    MIN_PITCH: int = 0
    MAX_PITCH: int = 127


class Scales:
    """Pitch-class templates relative to the scale root."""
    MAJOR: Tuple[int, ...] = (0, 2, 4, 5, 7, 9, 11)
    NATURAL_MINOR: Tuple[int, ...] = (0, 2, 3, 5, 7, 8, 10)
    HARMONIC_MINOR: Tuple[int, ...] = (0, 2, 3, 5, 7, 8, 11)


class Defaults:
    """Command-line and pipeline defaults."""
    PITCH_MODE: str = 'number'
    POSITION_COMPLEXITY: str = 'single'
    POSITION_RESOLUTION: int = 16
    DURATION_RESOLUTION: int = 4
    SEED: int = 0
    ALPHA: float = 0.05
    TRAIN_FRACTION: float = 0.9
    TPQN: int = 480
    MAX_TRANSPOSITION: int = 6
    TRANSPOSE_ATTEMPTS: int = 13
    OA_GRID_POINTS: int = 2048
    OA_TAIL_BANDWIDTHS: float = 6.0
    BANDWIDTH_DIVISOR: float = 4.0
    EXACT_WILCOXON_LIMIT: int = 20
    MIN_TEST_PAIRS: int = 5


class Files:
    """Output file names."""
    TRAIN: str = 'train.jsonl'
    TEST: str = 'test.jsonl'
    RUN_CONFIG: str = 'run_config.json'
    MIDI_SUFFIXES: Tuple[str, ...] = ('.mid', '.midi')
    TOKEN_SUFFIXES: Tuple[str, ...] = ('.tokens', '.txt')


# Report column order
METRIC_NAMES: Tuple[str, ...] = ('mai', 'h_p', 'h_pc', 'sc', 'msd', 'md', 'h_d', 'gc', 'ebr')
