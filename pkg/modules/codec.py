"""
Melody <-> token sequence codec.

The encoder emits pitch/duration tokens per note, fills gaps with REST, lays a
dense bar grid over every bar and stable-sorts everything by (time, kind rank).
The decoder trusts only note and rest durations; grid tokens are ignored.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

from modules.const import Grid
from modules.error_handler import InvalidConfigError, MalformedSequenceError
from modules.melody import QuantizedMelody, QuantizedNote
from modules.utils import ceil_to_multiple
from modules.vocabulary import (
    EncodingConfig, GRID_KINDS, PositionComplexity, Token, TokenKind, UNIT_KINDS, Vocabulary,
)

KIND_RANK = {
    TokenKind.BAR: 0,
    TokenKind.POSITION: 1,
    TokenKind.PITCH: 2,
    TokenKind.PITCH_CLASS: 2,
    TokenKind.OCTAVE: 2,
    TokenKind.REST: 2,
    TokenKind.DURATION: 3,
}


class TimedToken(NamedTuple):
    time: int
    kind_rank: int
    token: Token


@dataclass(frozen=True)
class TokenSequence:
    config: EncodingConfig
    tokens: Tuple[Token, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(token.text for token in self.tokens)

    def ids(self, vocab: Vocabulary) -> List[int]:
        return [vocab.text_to_id(token.text) for token in self.tokens]


@dataclass(frozen=True)
class SequenceViolation:
    index: int
    rule: str
    message: str = ""


# Rule names reported by validate_sequence()
RULE_MISSING_DURATION = "missing-duration"
RULE_ORPHAN_DURATION = "orphan-duration"
RULE_MISSING_OCTAVE = "missing-octave"
RULE_ORPHAN_OCTAVE = "orphan-octave"
RULE_GRID_CLOCK = "grid-clock"
RULE_GRID_COUNT = "grid-count"


def parse_tokens(vocab: Vocabulary, text: str, name: str = "") -> TokenSequence:
    """Parse space-separated token text; unknown spellings raise TokenLookupError."""
    return TokenSequence(vocab.config, tuple(vocab.token(t) for t in text.split()), name)


def _timed(time: int, tokens: Sequence[Token]) -> List[TimedToken]:
    return [TimedToken(time, KIND_RANK[token.kind], token) for token in tokens]


def _grid_tokens(vocab: Vocabulary, total_steps: int) -> List[TimedToken]:
    config = vocab.config
    bar_steps = config.bar_steps
    pr = config.position_resolution
    timed: List[TimedToken] = []
    for bar_start in range(0, total_steps, bar_steps):
        if vocab.bar is not None:
            timed.append(TimedToken(bar_start, KIND_RANK[TokenKind.BAR], vocab.bar))
        if pr <= 1:
            continue
        spacing = bar_steps // pr
        single = vocab.single_pos
        for k in range(pr):
            token = single if single is not None else vocab.position(k)
            timed.append(TimedToken(bar_start + k * spacing, KIND_RANK[TokenKind.POSITION], token))
    return timed


def _rest_tokens(vocab: Vocabulary, notes: Sequence[QuantizedNote]) -> List[TimedToken]:
    timed: List[TimedToken] = []
    clock = 0
    for note in notes:
        if note.onset > clock:
            timed.extend(_timed(clock, [vocab.rest]))
            timed.extend(_timed(clock, vocab.encode_duration(note.onset - clock)))
        clock = note.onset + note.duration
    return timed


def encode(q: QuantizedMelody, vocab: Vocabulary) -> TokenSequence:
    """
    Encode a quantized melody.

    Args:
        q: Quantized melody with q.dr equal to the vocabulary's DR
        vocab: Target vocabulary

    Returns:
        TokenSequence
    """
    timed = timed_tokens(q, vocab)
    return TokenSequence(vocab.config, tuple(t.token for t in timed), q.id)


def timed_tokens(q: QuantizedMelody, vocab: Vocabulary) -> List[TimedToken]:
    """Encoder output before the times are dropped, in final order."""
    config = vocab.config
    if q.dr != config.duration_resolution:
        raise InvalidConfigError(
            f"melody quantized at DR={q.dr} but vocabulary uses DR={config.duration_resolution}",
            context={"melody": q.id, "config": config.name},
        )
    notes = sorted(q.notes, key=lambda n: n.onset)

    timed: List[TimedToken] = []
    for note in notes:
        timed.extend(_timed(note.onset, vocab.encode_pitch(note.pitch)))
        timed.extend(_timed(note.onset, vocab.encode_duration(note.duration)))
    if config.position_resolution > 0:
        timed.extend(_grid_tokens(vocab, q.total_steps))
    timed.extend(_rest_tokens(vocab, notes))

    # sorted() is stable: equal (time, rank) keep insertion order
    timed.sort(key=lambda t: (t.time, t.kind_rank))
    return timed


def _content(seq: TokenSequence) -> List[Tuple[int, Token]]:
    """(original index, token) pairs without PAD and grid tokens."""
    return [
        (i, token) for i, token in enumerate(seq.tokens)
        if token.kind is not TokenKind.PAD and token.kind not in GRID_KINDS
    ]


def decode(seq: TokenSequence, vocab: Vocabulary, melody_id: Optional[str] = None) -> QuantizedMelody:
    """
    Rebuild a quantized melody from note and rest durations only.

    Raises:
        MalformedSequenceError: missing/orphan duration or octave tokens
    """
    dr = vocab.config.duration_resolution
    content = _content(seq)
    notes: List[QuantizedNote] = []
    clock = 0
    pos = 0
    while pos < len(content):
        index, token = content[pos]
        if token.kind is TokenKind.DURATION:
            raise MalformedSequenceError(f"duration token '{token.text}' without a pitch or REST",
                                         context={"index": index, "token": token.text})
        if token.kind is TokenKind.OCTAVE:
            raise MalformedSequenceError(f"octave token '{token.text}' without a pitch class",
                                         context={"index": index, "token": token.text})

        pitch: Optional[int] = None
        if token.kind is TokenKind.PITCH:
            pitch = token.payload
        elif token.kind is TokenKind.PITCH_CLASS:
            if pos + 1 >= len(content) or content[pos + 1][1].kind is not TokenKind.OCTAVE:
                raise MalformedSequenceError(f"pitch class '{token.text}' not followed by an octave",
                                             context={"index": index, "token": token.text})
            pitch = token.payload + 12 * content[pos + 1][1].payload
            pos += 1
        pos += 1

        duration = 0
        while pos < len(content) and content[pos][1].kind is TokenKind.DURATION:
            duration += content[pos][1].payload
            pos += 1
        if duration == 0:
            raise MalformedSequenceError(f"'{token.text}' is not followed by a duration",
                                         context={"index": index, "token": token.text})
        if pitch is not None:
            notes.append(QuantizedNote(clock, duration, pitch))
        clock += duration

    bar_steps = Grid.BEATS_PER_BAR * dr
    total_steps = max(bar_steps, ceil_to_multiple(clock, bar_steps))
    return QuantizedMelody(id=seq.name if melody_id is None else melody_id,
                           dr=dr, notes=tuple(notes), total_steps=total_steps)


def _grammar_violations(seq: TokenSequence) -> List[SequenceViolation]:
    violations = []
    content = _content(seq)
    open_unit: Optional[Tuple[int, Token]] = None
    has_duration = False
    for pos, (index, token) in enumerate(content):
        kind = token.kind
        if kind is TokenKind.DURATION:
            if open_unit is None:
                violations.append(SequenceViolation(index, RULE_ORPHAN_DURATION,
                                                    f"'{token.text}' has no preceding pitch or REST"))
            has_duration = True
            continue
        if open_unit is not None and not has_duration and kind is not TokenKind.OCTAVE:
            violations.append(SequenceViolation(open_unit[0], RULE_MISSING_DURATION,
                                                f"'{open_unit[1].text}' has no duration"))
        if kind is TokenKind.OCTAVE:
            previous = content[pos - 1][1] if pos else None
            if previous is None or previous.kind is not TokenKind.PITCH_CLASS:
                violations.append(SequenceViolation(index, RULE_ORPHAN_OCTAVE,
                                                    f"'{token.text}' has no preceding pitch class"))
            continue
        if kind is TokenKind.PITCH_CLASS:
            following = content[pos + 1][1] if pos + 1 < len(content) else None
            if following is None or following.kind is not TokenKind.OCTAVE:
                violations.append(SequenceViolation(index, RULE_MISSING_OCTAVE,
                                                    f"'{token.text}' is not followed by an octave"))
        open_unit, has_duration = (index, token), False
    if open_unit is not None and not has_duration:
        violations.append(SequenceViolation(open_unit[0], RULE_MISSING_DURATION,
                                            f"'{open_unit[1].text}' has no duration"))
    return violations


def _grid_violations(seq: TokenSequence, vocab: Vocabulary) -> List[SequenceViolation]:
    """
    Compare grid-implied times with the duration clock.

    A grid token at time g must come after every pitch unit that starts before
    g and before every unit that starts at or after g. Units are contiguous, so
    that means: start of the previous unit < g <= start of the next unit.
    """
    config = vocab.config
    pr = config.position_resolution
    bar_steps = config.bar_steps
    spacing = bar_steps // pr if pr > 1 else bar_steps
    single = config.position_complexity is PositionComplexity.SINGLE

    # (index, grid time) for every grid token
    grid: List[Tuple[int, Optional[int]]] = []
    violations: List[SequenceViolation] = []
    bars = 0
    last_k = None
    pos_in_bar = 0
    bar_index_of_pos = -1
    for index, token in enumerate(seq.tokens):
        if token.kind is TokenKind.BAR:
            if single and bars > 0 and pos_in_bar != pr:
                violations.append(SequenceViolation(index, RULE_GRID_COUNT,
                                                    f"bar {bars} has {pos_in_bar} POS tokens, expected {pr}"))
            bars += 1
            pos_in_bar = 0
            grid.append((index, (bars - 1) * bar_steps))
        elif token.kind is TokenKind.POSITION:
            if single:
                pos_in_bar += 1
                time = (bars - 1) * bar_steps + (pos_in_bar - 1) * spacing if bars else None
            else:
                if last_k is None or token.payload <= last_k:
                    bar_index_of_pos += 1
                last_k = token.payload
                time = bar_index_of_pos * bar_steps + token.payload * spacing
            grid.append((index, time))
    if single and bars > 0 and pos_in_bar != pr:
        violations.append(SequenceViolation(len(seq.tokens), RULE_GRID_COUNT,
                                            f"bar {bars} has {pos_in_bar} POS tokens, expected {pr}"))

    # Unit start times from the duration clock
    unit_starts: List[Tuple[int, int]] = []
    clock = 0
    current: Optional[int] = None
    for index, token in enumerate(seq.tokens):
        if token.kind in UNIT_KINDS:
            current = index
            unit_starts.append((index, clock))
        elif token.kind is TokenKind.DURATION and current is not None:
            clock += token.payload

    events = sorted([(index, "grid", time) for index, time in grid]
                    + [(index, "unit", start) for index, start in unit_starts])

    # Start of the next unit after each event position
    next_starts: List[Optional[int]] = [None] * len(events)
    upcoming: Optional[int] = None
    for pos in range(len(events) - 1, -1, -1):
        next_starts[pos] = upcoming
        if events[pos][1] == "unit":
            upcoming = events[pos][2]

    checked_bar_broken = -1
    previous_start: Optional[int] = None
    bar_of_token = 0
    for pos, (index, kind, value) in enumerate(events):
        if kind == "unit":
            previous_start = value
            continue
        token = seq.tokens[index]
        if token.kind is TokenKind.BAR:
            bar_of_token += 1
        if value is None:
            violations.append(SequenceViolation(index, RULE_GRID_CLOCK, "POS before the first BAR"))
            continue
        # Single PC counts are relative to the bar: after one mismatch the rest
        # of the bar is off by the same amount, so report once per bar
        if single and token.kind is TokenKind.POSITION and checked_bar_broken == bar_of_token:
            continue
        next_start = next_starts[pos]
        ok = (previous_start is None or previous_start < value) and \
            (next_start is None or value <= next_start)
        if not ok:
            violations.append(SequenceViolation(
                index, RULE_GRID_CLOCK,
                f"'{token.text}' implies time {value} but the duration clock disagrees"
            ))
            if single:
                checked_bar_broken = bar_of_token
    return violations


def validate_sequence(seq: TokenSequence, vocab: Vocabulary) -> List[SequenceViolation]:
    """
    Report grammar violations and, for PR > 0, grid/clock disagreements.

    Never raises; an empty list means the sequence is well formed and its
    grid agrees with the duration clock.
    """
    violations = _grammar_violations(seq)
    if vocab.config.position_resolution > 0:
        violations.extend(_grid_violations(seq, vocab))
    return sorted(violations, key=lambda v: v.index)
