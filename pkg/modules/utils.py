import os
import hashlib
from typing import List

import numpy as np

from modules.const import Files


def round_half_up_ratio(numerator: int, denominator: int) -> int:
    """
    Round numerator / denominator to the nearest integer, ties toward +infinity.

    Integer arithmetic only, so tick grids that are not whole numbers
    (e.g. tpqn=96 at 16 steps per beat) round without float error.

    Args:
        numerator: Integer numerator
        denominator: Positive integer denominator

    Returns:
        int: Rounded quotient
    """
    return (2 * numerator + denominator) // (2 * denominator)


def ceil_to_multiple(value: int, multiple: int) -> int:
    """Smallest multiple of `multiple` that is >= value."""
    return -(-value // multiple) * multiple


def stable_key(text: str) -> int:
    """64-bit integer digest of a text key, identical across processes."""
    return int.from_bytes(hashlib.md5(text.encode('utf-8')).digest()[:8], 'big')


def derived_rng(seed: int, key: str) -> np.random.Generator:
    """
    Generator seeded from (seed, key), e.g. a corpus seed and a melody id.

    Draws for one melody do not depend on which other melodies are processed
    or in which order.
    """
    return np.random.default_rng([seed & 0xFFFFFFFF, stable_key(key)])


def input_kind(path: str) -> str:
    """
    Classify an input path by suffix.

    Returns:
        str: 'midi', 'tokens' or 'melodies'
    """
    suffix = os.path.splitext(path)[1].lower()
    if os.path.isdir(path) or suffix in Files.MIDI_SUFFIXES:
        return 'midi'
    if suffix in Files.TOKEN_SUFFIXES:
        return 'tokens'
    return 'melodies'


def list_midi_files(directory: str) -> List[str]:
    """Sorted MIDI files directly inside a directory."""
    return sorted(
        os.path.join(directory, name) for name in os.listdir(directory)
        if os.path.splitext(name)[1].lower() in Files.MIDI_SUFFIXES
    )
