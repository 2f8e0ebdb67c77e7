"""
Token text files (one sequence per line, space-separated canonical spellings)
and integer-id files (one sequence per line, space-separated ids).
"""

import logging
from typing import List, Optional, Sequence

from modules.codec import TokenSequence, encode, parse_tokens
from modules.corpus.corpus import Corpus, corpus_stem, report_problem
from modules.error_analytics import ErrorTracker
from modules.error_handler import InvalidConfigError, StandardError, TokenLookupError
from modules.file_manager import atomic_write_text
from modules.melody import quantize
from modules.vocabulary import EncodingConfig, TokenKind, UNIT_KINDS, Vocabulary, build_vocabulary

general_logger = logging.getLogger('general_logger')

# A cut right after one of these would separate a unit from its durations
_OPEN_KINDS = UNIT_KINDS | {TokenKind.OCTAVE}


def encode_corpus(corpus: Corpus, config: EncodingConfig,
                  tracker: Optional[ErrorTracker] = None) -> List[TokenSequence]:
    """Quantize and encode every melody; failing melodies are reported and skipped."""
    vocab = build_vocabulary(config)
    sequences = []
    for melody in corpus:
        try:
            sequences.append(encode(quantize(melody, config.duration_resolution), vocab))
        except StandardError as e:
            e.context.setdefault("id", melody.id)
            report_problem(e, tracker)
    general_logger.info(f"Encoded {len(sequences)} of {len(corpus)} melodies with {config.name}")
    return sequences


def write_token_file(path: str, sequences: Sequence[TokenSequence]) -> None:
    atomic_write_text(path, "".join(seq.text() + "\n" for seq in sequences))
    general_logger.info(f"Wrote {len(sequences)} token sequences to {path}")


def write_id_file(path: str, sequences: Sequence[TokenSequence], vocab: Vocabulary) -> None:
    lines = (" ".join(str(i) for i in seq.ids(vocab)) + "\n" for seq in sequences)
    atomic_write_text(path, "".join(lines))
    general_logger.info(f"Wrote {len(sequences)} id sequences to {path}")


def load_token_file(path: str, config: EncodingConfig, tracker: Optional[ErrorTracker] = None,
                    strict: bool = False) -> List[TokenSequence]:
    """
    Read a token file and check every token against the config's vocabulary.

    Sequences are named `<file stem>-<line:06d>`. Lines with unknown tokens
    are reported with their line number and skipped.

    Args:
        path: Token text file
        config: Encoding config of the file
        tracker: Diagnostics sink (global tracker by default)
        strict: Raise instead of skipping

    Returns:
        List[TokenSequence]
    """
    vocab = build_vocabulary(config)
    stem = corpus_stem(path)
    sequences = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, raw in enumerate(f, start=1):
            try:
                sequences.append(parse_tokens(vocab, raw, name=f"{stem}-{line_number:06d}"))
            except TokenLookupError as e:
                e.context.update({"source": path, "line": line_number})
                report_problem(e, tracker, strict)
    general_logger.info(f"Loaded {len(sequences)} token sequences from {path}")
    return sequences


def truncate_tokens(seq: TokenSequence, max_len: int) -> TokenSequence:
    """
    Longest prefix of at most max_len tokens that ends on a unit boundary.

    The cut never separates a pitch or REST from its durations, a class from
    its octave, or one duration token from the next.
    """
    if max_len < 1:
        raise InvalidConfigError(f"max_len must be at least 1, got {max_len}", context={"max_len": max_len})
    tokens = seq.tokens
    if len(tokens) <= max_len:
        return seq
    cut = max_len
    while cut > 0 and (tokens[cut - 1].kind in _OPEN_KINDS or tokens[cut].kind is TokenKind.DURATION):
        cut -= 1
    return TokenSequence(seq.config, tokens[:cut], seq.name)
