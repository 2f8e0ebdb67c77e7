"""
Melody corpus: JSON-lines persistence, filters, seeded split and
transposition augmentation.

Melody file format, one JSON object per line:
    {"id": "a", "tpqn": 480, "meter": "4/4", "notes": [[0, 480, 60], ...]}
`meter` is optional.
"""

import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from modules.const import Defaults
from modules.error_analytics import ErrorTracker
from modules.error_handler import (
    DuplicateIdError, ErrorHandler, InsufficientDataError, InvalidConfigError,
    MelodyParseError, OutOfRangeError, StandardError,
)
from modules.file_manager import atomic_write_text
from modules.melody import RULE_MONOPHONY, Melody, enforce_monophony, transpose, validate
from modules.utils import derived_rng

general_logger = logging.getLogger('general_logger')

FOUR_FOUR = '4/4'


@dataclass(frozen=True)
class Corpus:
    """Melodies with unique ids plus a description of where they came from."""
    melodies: Tuple[Melody, ...] = ()
    provenance: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'melodies', tuple(self.melodies))
        seen = set()
        for melody in self.melodies:
            if melody.id in seen:
                raise DuplicateIdError(f"duplicate melody id '{melody.id}'",
                                       context={"id": melody.id, "source": self.provenance})
            seen.add(melody.id)

    def __len__(self) -> int:
        return len(self.melodies)

    def __iter__(self) -> Iterator[Melody]:
        return iter(self.melodies)

    @property
    def ids(self) -> List[str]:
        return [m.id for m in self.melodies]

    def derive(self, melodies: Sequence[Melody], note: str) -> 'Corpus':
        return Corpus(tuple(melodies), f"{self.provenance} | {note}" if self.provenance else note)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = Defaults.TRAIN_FRACTION
    seed: int = Defaults.SEED

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidConfigError(f"train fraction must be in (0, 1), got {self.train_fraction}",
                                     context={"train_fraction": self.train_fraction})


def report_problem(error: StandardError, tracker: Optional[ErrorTracker] = None,
                   strict: bool = False) -> None:
    """Raise in strict mode, otherwise log and record the diagnostic."""
    if strict:
        raise error
    ErrorHandler.handle_error(error, tracker=tracker)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def parse_melody_record(record: Any, source: str = '', line: Optional[int] = None) -> Melody:
    """
    Build a Melody from one decoded JSON record.

    Raises:
        MelodyParseError: missing or mistyped fields
    """
    context: Dict[str, Any] = {"source": source, "line": line}
    if not isinstance(record, dict):
        raise MelodyParseError("record is not an object", context=context)
    melody_id = record.get('id')
    if not isinstance(melody_id, str) or not melody_id:
        raise MelodyParseError("field 'id' must be a non-empty string", context=context)
    context["id"] = melody_id
    tpqn = record.get('tpqn')
    if not _is_int(tpqn) or tpqn <= 0:
        raise MelodyParseError(f"field 'tpqn' must be a positive integer, got {tpqn!r}", context=context)
    meter = record.get('meter')
    if meter is not None and not isinstance(meter, str):
        raise MelodyParseError("field 'meter' must be a string", context=context)
    notes = record.get('notes')
    if not isinstance(notes, list):
        raise MelodyParseError("field 'notes' must be a list", context=context)
    for i, note in enumerate(notes):
        if not isinstance(note, list) or len(note) != 3 or not all(_is_int(v) for v in note):
            raise MelodyParseError(f"note {i} is not [onset, duration, pitch] integers", context=context)
    return Melody(id=melody_id, tpqn=tpqn, notes=notes, meter=meter)


def load_melodies(path: str, tracker: Optional[ErrorTracker] = None, strict: bool = False,
                  repair: bool = False) -> Corpus:
    """
    Read a melody file.

    Malformed lines, invalid melodies and duplicate ids are reported with
    their line number and skipped.

    Args:
        path: JSON-lines melody file
        tracker: Diagnostics sink (global tracker by default)
        strict: Raise on the first problem instead of skipping
        repair: Truncate overlapping notes instead of rejecting the melody

    Returns:
        Corpus
    """
    melodies: List[Melody] = []
    seen = set()
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text:
                continue
            context = {"source": path, "line": line_number}
            try:
                record = json.loads(text)
            except json.JSONDecodeError as e:
                report_problem(MelodyParseError(f"invalid JSON: {e.msg}", context=context,
                                                original_exception=e), tracker, strict)
                continue
            try:
                melody = parse_melody_record(record, path, line_number)
            except MelodyParseError as e:
                report_problem(e, tracker, strict)
                continue

            violations = validate(melody)
            if violations and repair and all(v.rule == RULE_MONOPHONY for v in violations):
                melody = enforce_monophony(melody)
                violations = validate(melody)
            if violations:
                first = violations[0]
                report_problem(MelodyParseError(
                    f"invalid melody '{melody.id}': note {first.index}: {first.message}",
                    context={**context, "rule": first.rule, "violations": len(violations)},
                ), tracker, strict)
                continue
            if melody.id in seen:
                report_problem(DuplicateIdError(f"duplicate melody id '{melody.id}'", context=context),
                               tracker, strict)
                continue
            seen.add(melody.id)
            melodies.append(melody)

    general_logger.info(f"Loaded {len(melodies)} melodies from {path}")
    return Corpus(tuple(melodies), path)


def melody_record(melody: Melody) -> Dict[str, Any]:
    record: Dict[str, Any] = {"id": melody.id, "tpqn": melody.tpqn}
    if melody.meter is not None:
        record["meter"] = melody.meter
    record["notes"] = [list(note) for note in melody.notes]
    return record


def dumps_melodies(melodies: Sequence[Melody]) -> str:
    return "".join(json.dumps(melody_record(m), separators=(',', ':')) + "\n" for m in melodies)


def save_melodies(corpus: Corpus, path: str) -> None:
    """Atomically write a corpus in the melody file format."""
    atomic_write_text(path, dumps_melodies(corpus.melodies))
    general_logger.info(f"Saved {len(corpus)} melodies to {path}")


def filter_four_four(corpus: Corpus, bar_check: bool = False) -> Corpus:
    """
    Keep melodies usable as 4/4 material.

    Melodies without notes have no quantizable span and are always dropped.
    With bar_check, melodies whose metadata declares another meter (including
    "mixed") are dropped too; an undeclared meter is accepted.
    """
    def keep(melody: Melody) -> bool:
        if not melody.notes:
            return False
        if bar_check and melody.meter is not None and melody.meter != FOUR_FOUR:
            return False
        return True

    kept = [m for m in corpus if keep(m)]
    general_logger.info(f"4/4 filter: kept {len(kept)} of {len(corpus)} melodies")
    return corpus.derive(kept, 'filter_four_four')


def filter_min_notes(corpus: Corpus, min_notes: int) -> Corpus:
    kept = [m for m in corpus if len(m.notes) >= min_notes]
    general_logger.info(f"Minimum-notes filter ({min_notes}): kept {len(kept)} of {len(corpus)} melodies")
    return corpus.derive(kept, f'filter_min_notes({min_notes})')


def split(corpus: Corpus, spec: SplitSpec) -> Tuple[Corpus, Corpus]:
    """
    Deterministic train/test split.

    Ids are sorted first so the result does not depend on input order, then
    shuffled with a generator seeded from spec.seed. The first
    floor(n * train_fraction) melodies go to train.

    Returns:
        Tuple[Corpus, Corpus]: (train, test)
    """
    if not len(corpus):
        raise InsufficientDataError("cannot split an empty corpus", context={"source": corpus.provenance})
    ordered = sorted(corpus.melodies, key=lambda m: m.id)
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(ordered))
    shuffled = [ordered[i] for i in order]
    n_train = math.floor(len(shuffled) * spec.train_fraction + 1e-9)
    train = corpus.derive(shuffled[:n_train], f'split(train, seed={spec.seed})')
    test = corpus.derive(shuffled[n_train:], f'split(test, seed={spec.seed})')
    general_logger.info(f"Split {len(corpus)} melodies into {len(train)} train / {len(test)} test")
    return train, test


def _transpose_randomly(melody: Melody, rng: np.random.Generator, low: int, high: int,
                        attempts: int) -> Tuple[Melody, int]:
    for _ in range(attempts):
        shift = int(rng.integers(low, high + 1))
        try:
            return transpose(melody, shift), shift
        except OutOfRangeError:
            continue
    return melody, 0


def augment_epoch(corpus: Corpus, seed: int, low: int = -Defaults.MAX_TRANSPOSITION,
                  high: int = Defaults.MAX_TRANSPOSITION, epoch: int = 0,
                  attempts: int = Defaults.TRANSPOSE_ATTEMPTS) -> Corpus:
    """
    Transpose every melody by a random shift in [low, high].

    Each melody draws from its own generator seeded by (seed, epoch, id), so
    the result does not depend on processing order. Shifts that push a pitch
    out of range are redrawn; after `attempts` failures the melody is kept
    untransposed.

    Args:
        corpus: Source corpus
        seed: Base seed
        low: Lowest shift in semitones
        high: Highest shift in semitones
        epoch: Epoch number, mixed into the per-melody seed

    Returns:
        Corpus: Same ids and order, transposed pitches
    """
    if low > high:
        raise InvalidConfigError(f"transposition range [{low}, {high}] is empty",
                                 context={"low": low, "high": high})
    melodies = []
    unchanged = 0
    for melody in corpus:
        rng = derived_rng(seed, f"{epoch}/{melody.id}")
        shifted, shift = _transpose_randomly(melody, rng, low, high, attempts)
        unchanged += shift == 0
        melodies.append(shifted)
    general_logger.info(f"Augmented {len(melodies)} melodies (epoch {epoch}, {unchanged} unshifted)")
    return corpus.derive(melodies, f'augment(seed={seed}, epoch={epoch})')


def corpus_stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path.rstrip(os.sep)))[0]
