"""
Objective per-melody metrics.

Pitch metrics: mean absolute interval, pitch / pitch-class entropy, scale
consistency and the major-scale rate SD. Rhythm metrics: mean duration,
duration entropy, groove consistency and empty beat rate.
"""

import logging
from dataclasses import dataclass, fields
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from modules.const import METRIC_NAMES, Scales
from modules.error_handler import UndefinedMetricError
from modules.melody import QuantizedMelody

analytics_logger = logging.getLogger('analytics_logger')


@dataclass(frozen=True)
class MetricReport:
    """The nine metrics of one melody; None marks an undefined metric."""
    id: str
    mai: Optional[float] = None
    h_p: Optional[float] = None
    h_pc: Optional[float] = None
    sc: Optional[float] = None
    msd: Optional[float] = None
    md: Optional[float] = None
    h_d: Optional[float] = None
    gc: Optional[float] = None
    ebr: Optional[float] = None

    def get(self, name: str) -> Optional[float]:
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def values(self) -> List[Optional[float]]:
        return [getattr(self, name) for name in METRIC_NAMES]

    def as_row(self) -> List[object]:
        return [self.id, *self.values()]

    def defined(self) -> Dict[str, float]:
        return {name: value for name, value in zip(METRIC_NAMES, self.values()) if value is not None}


def _require_notes(q: QuantizedMelody, minimum: int, metric: str) -> None:
    if len(q.notes) < minimum:
        raise UndefinedMetricError(
            f"{metric} needs at least {minimum} note(s), melody has {len(q.notes)}",
            context={"melody": q.id, "metric": metric},
        )


def _entropy_bits(values: Sequence[int]) -> float:
    # Sorted counts make the result independent of which symbols occur
    _, counts = np.unique(np.asarray(values), return_counts=True)
    return float(stats.entropy(np.sort(counts), base=2))


def _class_histogram(q: QuantizedMelody) -> np.ndarray:
    return np.bincount(np.asarray(q.pitches, dtype=np.int64) % 12, minlength=12)


def _template_matrix(template: Tuple[int, ...]) -> np.ndarray:
    """12 x 12 membership matrix: row = root, column = pitch class."""
    classes = np.arange(12)
    offsets = (classes[None, :] - classes[:, None]) % 12
    return np.isin(offsets, template).astype(np.int64)


def _scale_rates(q: QuantizedMelody, template: Tuple[int, ...]) -> np.ndarray:
    """In-scale rate for each of the 12 roots."""
    in_scale = _template_matrix(template) @ _class_histogram(q)
    return in_scale / len(q.notes)


def mai(q: QuantizedMelody) -> float:
    """Mean absolute interval between consecutive notes, in semitones."""
    _require_notes(q, 2, 'mai')
    notes = sorted(q.notes, key=lambda n: n.onset)
    pitches = np.array([n.pitch for n in notes], dtype=np.int64)
    return float(np.abs(np.diff(pitches)).mean())


def pitch_entropy(q: QuantizedMelody) -> float:
    _require_notes(q, 1, 'h_p')
    return _entropy_bits(q.pitches)


def pitch_class_entropy(q: QuantizedMelody) -> float:
    _require_notes(q, 1, 'h_pc')
    return _entropy_bits([p % 12 for p in q.pitches])


def duration_entropy(q: QuantizedMelody) -> float:
    _require_notes(q, 1, 'h_d')
    return _entropy_bits([n.duration for n in q.notes])


def scale_consistency(q: QuantizedMelody, harmonic_minor: bool = False) -> float:
    """
    Largest in-scale rate over all major and minor scales.

    Args:
        q: Quantized melody
        harmonic_minor: Also try harmonic minor (natural minor sets coincide with majors)

    Returns:
        float: Rate in [0, 1]
    """
    _require_notes(q, 1, 'sc')
    templates = [Scales.MAJOR, Scales.NATURAL_MINOR]
    if harmonic_minor:
        templates.append(Scales.HARMONIC_MINOR)
    return float(max(_scale_rates(q, template).max() for template in templates))


def major_scale_rate_sd(q: QuantizedMelody) -> float:
    """Population SD of the 12 major-scale in-scale rates."""
    _require_notes(q, 1, 'msd')
    return float(np.std(np.sort(_scale_rates(q, Scales.MAJOR))))


def mean_duration(q: QuantizedMelody) -> float:
    """Mean note length in beats."""
    _require_notes(q, 1, 'md')
    return float(sum(n.duration for n in q.notes) / (len(q.notes) * q.dr))


def _onset_roll(q: QuantizedMelody) -> np.ndarray:
    roll = np.zeros(q.total_steps, dtype=bool)
    for note in q.notes:
        if note.onset < q.total_steps:
            roll[note.onset] = True
    return roll


def _hold_roll(q: QuantizedMelody) -> np.ndarray:
    roll = np.zeros(q.total_steps, dtype=bool)
    for note in q.notes:
        roll[note.onset:note.onset + note.duration] = True
    return roll


def groove_consistency(q: QuantizedMelody) -> float:
    """Mean onset-pattern similarity (1 - normalised hamming) of consecutive bars."""
    bar_steps = q.bar_steps
    bars = q.total_steps // bar_steps
    if bars < 2:
        raise UndefinedMetricError(
            f"gc needs at least 2 bars, melody has {bars}",
            context={"melody": q.id, "metric": 'gc'},
        )
    grid = _onset_roll(q)[:bars * bar_steps].reshape(bars, bar_steps)
    distances = np.count_nonzero(grid[1:] != grid[:-1], axis=1)
    return float(np.mean(1.0 - distances / bar_steps))


def empty_beat_rate(q: QuantizedMelody) -> float:
    """Share of beats in which no note is played or held."""
    beats = q.total_steps // q.dr
    if beats < 1:
        raise UndefinedMetricError(
            "ebr needs at least one beat",
            context={"melody": q.id, "metric": 'ebr'},
        )
    sounding = _hold_roll(q)[:beats * q.dr].reshape(beats, q.dr).any(axis=1)
    return float(np.count_nonzero(~sounding) / beats)


METRIC_FUNCTIONS: Dict[str, Callable[[QuantizedMelody], float]] = {
    'mai': mai,
    'h_p': pitch_entropy,
    'h_pc': pitch_class_entropy,
    'sc': scale_consistency,
    'msd': major_scale_rate_sd,
    'md': mean_duration,
    'h_d': duration_entropy,
    'gc': groove_consistency,
    'ebr': empty_beat_rate,
}


def report(q: QuantizedMelody, harmonic_minor: bool = False) -> MetricReport:
    """
    Compute all nine metrics; undefined ones are recorded as None.

    Args:
        q: Quantized melody
        harmonic_minor: Passed on to scale_consistency

    Returns:
        MetricReport
    """
    values: Dict[str, Optional[float]] = {}
    for name, func in METRIC_FUNCTIONS.items():
        try:
            if name == 'sc':
                values[name] = scale_consistency(q, harmonic_minor=harmonic_minor)
            else:
                values[name] = func(q)
        except UndefinedMetricError as e:
            analytics_logger.debug(f"{q.id}: {e.message}")
            values[name] = None
    return MetricReport(id=q.id, **values)


def report_many(melodies: Iterable[QuantizedMelody], harmonic_minor: bool = False) -> List[MetricReport]:
    reports = [report(q, harmonic_minor=harmonic_minor) for q in melodies]
    if reports:
        undefined = sum(1 for r in reports for v in r.values() if v is None)
        analytics_logger.info(f"Computed metrics for {len(reports)} melodies ({undefined} undefined values)")
    return reports


def metric_column(reports: Sequence[MetricReport], name: str) -> np.ndarray:
    """Defined values of one metric across reports, in report order."""
    return np.array([r.get(name) for r in reports if r.get(name) is not None], dtype=float)


REPORT_HEADERS: List[str] = [f.name for f in fields(MetricReport)]
