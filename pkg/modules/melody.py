"""
Tick-timed monophonic melody model, validation, quantization to a duration
grid and transposition.

All values are immutable; every operation returns a new object.
"""

from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple

from modules.const import Grid
from modules.error_handler import InvalidConfigError, OutOfRangeError
from modules.utils import ceil_to_multiple, round_half_up_ratio


class Note(NamedTuple):
    """A note in ticks."""
    onset: int
    duration: int
    pitch: int


class QuantizedNote(NamedTuple):
    """A note in grid steps."""
    onset: int
    duration: int
    pitch: int


@dataclass(frozen=True)
class Melody:
    """Monophonic melody in 4/4; bar length is 4 x tpqn ticks."""
    id: str
    tpqn: int
    notes: Tuple[Note, ...] = ()
    meter: Optional[str] = None

    def __post_init__(self):
        # Accept any iterable of (onset, duration, pitch) triples
        object.__setattr__(self, 'notes', tuple(Note(*n) for n in self.notes))

    @property
    def bar_ticks(self) -> int:
        return Grid.BEATS_PER_BAR * self.tpqn


@dataclass(frozen=True)
class QuantizedMelody:
    """Melody on a grid of `dr` steps per beat, padded to whole bars."""
    id: str
    dr: int
    notes: Tuple[QuantizedNote, ...] = ()
    total_steps: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'notes', tuple(QuantizedNote(*n) for n in self.notes))

    @property
    def bar_steps(self) -> int:
        return Grid.BEATS_PER_BAR * self.dr

    @property
    def pitches(self) -> List[int]:
        return [n.pitch for n in self.notes]


@dataclass(frozen=True)
class Violation:
    """One broken melody invariant."""
    index: int
    rule: str
    message: str = field(default='', compare=False)


# Rule names reported by validate()
RULE_ONSET = 'onset'
RULE_DURATION = 'duration'
RULE_PITCH_RANGE = 'pitch-range'
RULE_ORDER = 'order'
RULE_MONOPHONY = 'monophony'


def validate(melody: Melody) -> List[Violation]:
    """
    Check the Melody invariants.

    Args:
        melody: Melody to check

    Returns:
        List[Violation]: Empty iff the melody is valid
    """
    violations: List[Violation] = []
    if melody.tpqn <= 0:
        violations.append(Violation(-1, 'tpqn', f"tpqn must be positive, got {melody.tpqn}"))
    previous: Optional[Note] = None
    for i, note in enumerate(melody.notes):
        if note.onset < 0:
            violations.append(Violation(i, RULE_ONSET, f"negative onset {note.onset}"))
        if note.duration <= 0:
            violations.append(Violation(i, RULE_DURATION, f"non-positive duration {note.duration}"))
        if not Grid.MIN_PITCH <= note.pitch <= Grid.MAX_PITCH:
            violations.append(Violation(i, RULE_PITCH_RANGE, f"pitch {note.pitch} outside [0, 127]"))
        if previous is not None:
            if note.onset < previous.onset:
                violations.append(Violation(i, RULE_ORDER, "notes not sorted by onset"))
            elif previous.onset + previous.duration > note.onset:
                violations.append(Violation(
                    i, RULE_MONOPHONY,
                    f"overlaps previous note ending at {previous.onset + previous.duration}"
                ))
        previous = note
    return violations


def _truncate_overlaps(notes: Sequence[Tuple[int, int, int]]) -> List[Tuple[int, int, int]]:
    kept = []
    for i, (onset, duration, pitch) in enumerate(notes):
        if i + 1 < len(notes):
            next_onset = notes[i + 1][0]
            if onset + duration > next_onset:
                duration = next_onset - onset
        if duration > 0:
            kept.append((onset, duration, pitch))
    return kept


def enforce_monophony(melody: Melody) -> Melody:
    """
    Truncate every note that overlaps its successor at the successor's onset.

    Notes left with no duration are removed. Input notes must be sorted by onset.

    Args:
        melody: Melody, possibly overlapping

    Returns:
        Melody: Monophonic melody
    """
    return replace(melody, notes=tuple(Note(*n) for n in _truncate_overlaps(melody.notes)))


def _check_resolution(dr: int) -> None:
    if dr <= 0:
        raise InvalidConfigError(f"duration resolution must be positive, got {dr}",
                                 context={"dr": dr})


def quantize(melody: Melody, dr: int) -> QuantizedMelody:
    """
    Round onsets and offsets to a grid of `dr` steps per quarter note.

    Onset and offset are rounded independently (ties round up), so a note's
    step duration depends on where it starts. Collapsed notes are dropped,
    overlaps created by rounding are truncated and the length is padded to
    whole bars (at least one).

    Args:
        melody: Valid melody
        dr: Steps per beat

    Returns:
        QuantizedMelody
    """
    _check_resolution(dr)
    if melody.tpqn <= 0:
        raise InvalidConfigError(f"tpqn must be positive, got {melody.tpqn}",
                                 context={"melody": melody.id})

    rounded = []
    for note in melody.notes:
        onset = round_half_up_ratio(note.onset * dr, melody.tpqn)
        offset = round_half_up_ratio((note.onset + note.duration) * dr, melody.tpqn)
        if offset - onset > 0:
            rounded.append((onset, offset - onset, note.pitch))
    rounded.sort(key=lambda n: n[0])
    notes = _truncate_overlaps(rounded)

    bar_steps = Grid.BEATS_PER_BAR * dr
    end = max((onset + duration for onset, duration, _ in notes), default=0)
    total_steps = max(bar_steps, ceil_to_multiple(end, bar_steps))
    return QuantizedMelody(id=melody.id, dr=dr, notes=tuple(notes), total_steps=total_steps)


def to_melody(q: QuantizedMelody, tpqn: int, meter: Optional[str] = None) -> Melody:
    """
    Convert a quantized melody back to ticks.

    Args:
        q: Quantized melody
        tpqn: Target ticks per quarter note, a multiple of q.dr

    Returns:
        Melody
    """
    if tpqn <= 0 or tpqn % q.dr:
        raise InvalidConfigError(f"tpqn {tpqn} is not a positive multiple of dr {q.dr}",
                                 context={"tpqn": tpqn, "dr": q.dr})
    ticks = tpqn // q.dr
    notes = tuple(Note(n.onset * ticks, n.duration * ticks, n.pitch) for n in q.notes)
    return Melody(id=q.id, tpqn=tpqn, notes=notes, meter=meter)


def bar_count(q: QuantizedMelody) -> int:
    return q.total_steps // q.bar_steps


def transpose(melody: Melody, semitones: int) -> Melody:
    """
    Shift every pitch by `semitones`; timing is unchanged.

    Raises:
        OutOfRangeError: shift outside [-127, 127] or a resulting pitch outside [0, 127]
    """
    if not -Grid.MAX_PITCH <= semitones <= Grid.MAX_PITCH:
        raise OutOfRangeError(f"transposition {semitones} outside [-127, 127]",
                              context={"melody": melody.id, "semitones": semitones})
    if semitones == 0:
        return melody
    notes = []
    for note in melody.notes:
        pitch = note.pitch + semitones
        if not Grid.MIN_PITCH <= pitch <= Grid.MAX_PITCH:
            raise OutOfRangeError(
                f"pitch {note.pitch} transposed by {semitones} leaves [0, 127]",
                context={"melody": melody.id, "semitones": semitones},
            )
        notes.append(note._replace(pitch=pitch))
    return replace(melody, notes=tuple(notes))
