import unittest
import os
import sys
import tempfile

import pytest

# Add the project root to the Python path so we can import modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from modules.utils import (
    ceil_to_multiple, derived_rng, input_kind, list_midi_files, round_half_up_ratio, stable_key,
)


class TestInputKind(unittest.TestCase):

    def test_suffixes(self):
        self.assertEqual(input_kind('melodies.jsonl'), 'melodies')
        self.assertEqual(input_kind('melodies.json'), 'melodies')
        self.assertEqual(input_kind('song.MID'), 'midi')
        self.assertEqual(input_kind('song.midi'), 'midi')
        self.assertEqual(input_kind('train.tokens'), 'tokens')
        self.assertEqual(input_kind('samples.txt'), 'tokens')

    def test_directory_is_midi(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.assertEqual(input_kind(tmp), 'midi')

    def test_list_midi_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            for name in ('b.mid', 'a.midi', 'notes.txt', 'c.MID'):
                open(os.path.join(tmp, name), 'wb').close()
            names = [os.path.basename(p) for p in list_midi_files(tmp)]
        self.assertEqual(names, ['a.midi', 'b.mid', 'c.MID'])


@pytest.mark.parametrize("numerator,denominator,expected", [
    (0, 480, 0), (240, 480, 1), (239, 480, 0), (720, 480, 2), (15 * 16, 480, 1), (-240, 480, 0),
])
def test_round_half_up_ratio(numerator, denominator, expected):
    assert round_half_up_ratio(numerator, denominator) == expected


@pytest.mark.parametrize("value,multiple,expected", [(0, 16, 0), (1, 16, 16), (16, 16, 16), (17, 16, 32)])
def test_ceil_to_multiple(value, multiple, expected):
    assert ceil_to_multiple(value, multiple) == expected


def test_derived_rng_depends_on_seed_and_key_only():
    first = derived_rng(7, '3/tune-1').integers(-6, 7, size=8).tolist()
    assert derived_rng(7, '3/tune-1').integers(-6, 7, size=8).tolist() == first
    assert derived_rng(8, '3/tune-1').integers(0, 1 << 30, size=4).tolist() != \
        derived_rng(7, '3/tune-1').integers(0, 1 << 30, size=4).tolist()
    assert stable_key('tune-1') == stable_key('tune-1')
    assert stable_key('tune-1') != stable_key('tune-2')


if __name__ == '__main__':
    unittest.main()
