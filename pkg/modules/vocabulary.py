"""
Finite token set induced by the four encoding hyper-parameters.

Ids are assigned in a fixed order: PAD (0), bar/grid tokens, the pitch family
(pitch numbers or classes and octaves, then REST) and durations d1..d(4*DR).
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

from modules.const import Grid, Tokens
from modules.error_handler import InvalidConfigError, OutOfRangeError, TokenLookupError


class PitchMode(Enum):
    NUMBER = "number"
    CLASS_OCTAVE = "class-octave"


class PositionComplexity(Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"
    UNDEFINED = "undefined"


class TokenKind(Enum):
    PAD = "pad"
    BAR = "bar"
    POSITION = "position"
    PITCH = "pitch"
    PITCH_CLASS = "pitch-class"
    OCTAVE = "octave"
    REST = "rest"
    DURATION = "duration"


# Kinds that open a pitch unit (a note or a rest); octave tokens complete a class
UNIT_KINDS = frozenset({TokenKind.PITCH, TokenKind.PITCH_CLASS, TokenKind.REST})
GRID_KINDS = frozenset({TokenKind.BAR, TokenKind.POSITION})


@dataclass(frozen=True)
class EncodingConfig:
    """The Pitch, PC, PR and DR hyper-parameters."""
    pitch_mode: PitchMode = PitchMode.NUMBER
    position_complexity: PositionComplexity = PositionComplexity.SINGLE
    position_resolution: int = 16
    duration_resolution: int = 4

    @property
    def bar_steps(self) -> int:
        return Grid.BEATS_PER_BAR * self.duration_resolution

    @property
    def name(self) -> str:
        """Stable slug, e.g. number-single-pr16-dr4."""
        return (f"{self.pitch_mode.value}-{self.position_complexity.value}"
                f"-pr{self.position_resolution}-dr{self.duration_resolution}")

    def violations(self) -> List[str]:
        pr, dr = self.position_resolution, self.duration_resolution
        problems = []
        if dr not in Grid.DURATION_RESOLUTIONS:
            problems.append(f"DR must be one of {sorted(Grid.DURATION_RESOLUTIONS)}, got {dr}")
        if pr not in Grid.POSITION_RESOLUTIONS:
            problems.append(f"PR must be one of {sorted(Grid.POSITION_RESOLUTIONS)}, got {pr}")
        if dr > 0 and pr > Grid.BEATS_PER_BAR * dr:
            problems.append(f"PR {pr} exceeds 4 x DR = {Grid.BEATS_PER_BAR * dr}")
        if pr > 1 and dr > 0 and (Grid.BEATS_PER_BAR * dr) % pr:
            problems.append(f"PR {pr} does not divide 4 x DR = {Grid.BEATS_PER_BAR * dr}")
        undefined = self.position_complexity is PositionComplexity.UNDEFINED
        if pr <= 1 and not undefined:
            problems.append(f"PC must be undefined when PR is {pr}")
        if pr > 1 and undefined:
            problems.append(f"PC must be single or multiple when PR is {pr}")
        return problems

    def validate(self) -> "EncodingConfig":
        problems = self.violations()
        if problems:
            raise InvalidConfigError("; ".join(problems), context={"config": self.name})
        return self

    @classmethod
    def from_names(cls, pitch: str = "number", pc: str = "single",
                   pr: int = 16, dr: int = 4) -> "EncodingConfig":
        """
        Build a config from CLI spellings; PR <= 1 forces PC to undefined.

        Raises:
            InvalidConfigError: unknown spelling or invariant violation
        """
        try:
            pitch_mode = PitchMode(pitch.lower().replace("_", "-"))
            complexity = PositionComplexity(pc.lower())
        except ValueError as e:
            raise InvalidConfigError(f"unknown option: {e}", original_exception=e)
        if pr <= 1:
            complexity = PositionComplexity.UNDEFINED
        return cls(pitch_mode, complexity, pr, dr).validate()

    def to_dict(self) -> Dict[str, object]:
        return {
            "pitch": self.pitch_mode.value,
            "pc": self.position_complexity.value,
            "pr": self.position_resolution,
            "dr": self.duration_resolution,
        }


def experiment_grid() -> Iterator[EncodingConfig]:
    """The 48 configurations of the experiment grid."""
    for dr in sorted(Grid.DURATION_RESOLUTIONS):
        for mode in PitchMode:
            yield EncodingConfig(mode, PositionComplexity.UNDEFINED, 0, dr)
            yield EncodingConfig(mode, PositionComplexity.UNDEFINED, 1, dr)
            for pc in (PositionComplexity.SINGLE, PositionComplexity.MULTIPLE):
                for pr in (4, Grid.BEATS_PER_BAR * dr):
                    yield EncodingConfig(mode, pc, pr, dr)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    payload: Optional[int]
    text: str

    def __str__(self) -> str:
        return self.text


class Vocabulary:
    """Immutable text <-> id <-> Token mapping for one EncodingConfig."""

    def __init__(self, config: EncodingConfig):
        self.config = config.validate()
        self.tokens: Tuple[Token, ...] = tuple(self._enumerate(config))
        self._by_text: Dict[str, int] = {token.text: i for i, token in enumerate(self.tokens)}
        self.pad = self.tokens[0]
        self.bar = self._optional(Tokens.BAR)
        self.rest = self.tokens[self._by_text[Tokens.REST]]

    @staticmethod
    def _enumerate(config: EncodingConfig) -> Iterator[Token]:
        yield Token(TokenKind.PAD, None, Tokens.PAD)

        pr = config.position_resolution
        if pr == 1:
            yield Token(TokenKind.BAR, None, Tokens.BAR)
        elif pr > 1 and config.position_complexity is PositionComplexity.SINGLE:
            yield Token(TokenKind.BAR, None, Tokens.BAR)
            yield Token(TokenKind.POSITION, None, Tokens.POS)
        elif pr > 1:
            for k in range(pr):
                yield Token(TokenKind.POSITION, k, f"{Tokens.POS}{k}")

        if config.pitch_mode is PitchMode.NUMBER:
            for p in range(Grid.MIN_PITCH, Grid.MAX_PITCH + 1):
                yield Token(TokenKind.PITCH, p, f"{Tokens.PITCH_PREFIX}{p}")
        else:
            for c, spelling in enumerate(Tokens.PITCH_CLASSES):
                yield Token(TokenKind.PITCH_CLASS, c, spelling)
            for o in range(Tokens.OCTAVE_COUNT):
                yield Token(TokenKind.OCTAVE, o, f"{Tokens.OCTAVE_PREFIX}{o}")
        yield Token(TokenKind.REST, None, Tokens.REST)

        for s in range(1, config.bar_steps + 1):
            yield Token(TokenKind.DURATION, s, f"{Tokens.DURATION_PREFIX}{s}")

    def _optional(self, text: str) -> Optional[Token]:
        index = self._by_text.get(text)
        return None if index is None else self.tokens[index]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, text: str) -> bool:
        return text in self._by_text

    @property
    def single_pos(self) -> Optional[Token]:
        if self.config.position_complexity is PositionComplexity.SINGLE:
            return self._optional(Tokens.POS)
        return None

    def position(self, k: int) -> Token:
        """Absolute grid token POS<k> (multiple PC)."""
        return self.token(f"{Tokens.POS}{k}")

    def text_to_id(self, text: str) -> int:
        try:
            return self._by_text[text]
        except KeyError:
            raise TokenLookupError(f"unknown token '{text}' for {self.config.name}",
                                   context={"token": text}) from None

    def id_to_token(self, token_id: int) -> Token:
        if not 0 <= token_id < len(self.tokens):
            raise TokenLookupError(f"unknown token id {token_id} for {self.config.name}",
                                   context={"token_id": token_id})
        return self.tokens[token_id]

    def token(self, text: str) -> Token:
        return self.tokens[self.text_to_id(text)]

    def encode_pitch(self, pitch: int) -> List[Token]:
        """
        Pitch tokens for a MIDI number.

        Number mode gives [p<pitch>]; class-octave mode gives the class token
        for pitch mod 12 followed by o<pitch // 12>.
        """
        if not Grid.MIN_PITCH <= pitch <= Grid.MAX_PITCH:
            raise OutOfRangeError(f"pitch {pitch} outside [0, 127]", context={"pitch": pitch})
        if self.config.pitch_mode is PitchMode.NUMBER:
            return [self.token(f"{Tokens.PITCH_PREFIX}{pitch}")]
        return [
            self.token(Tokens.PITCH_CLASSES[pitch % 12]),
            self.token(f"{Tokens.OCTAVE_PREFIX}{pitch // 12}"),
        ]

    def encode_duration(self, steps: int) -> List[Token]:
        """
        Duration tokens summing to `steps`.

        Lengths above one bar are split greedily into d<4*DR> tokens plus a remainder.
        """
        if steps <= 0:
            raise OutOfRangeError(f"duration must be at least one step, got {steps}",
                                  context={"steps": steps})
        longest = self.config.bar_steps
        tokens = []
        while steps > longest:
            tokens.append(self.tokens[self._by_text[f"{Tokens.DURATION_PREFIX}{longest}"]])
            steps -= longest
        tokens.append(self.tokens[self._by_text[f"{Tokens.DURATION_PREFIX}{steps}"]])
        return tokens

    def dump(self) -> str:
        """`<id>\\t<text>` per line."""
        return "".join(f"{i}\t{token.text}\n" for i, token in enumerate(self.tokens))


@lru_cache(maxsize=None)
def build_vocabulary(config: EncodingConfig) -> Vocabulary:
    """
    Build (once per config) the vocabulary for an encoding config.

    Raises:
        InvalidConfigError: config invariants violated
    """
    return Vocabulary(config)
