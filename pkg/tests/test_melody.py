import unittest
import os
import sys

import numpy as np
import pytest

# Add the project root to the Python path so we can import modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from modules.error_handler import InvalidConfigError, OutOfRangeError
from modules.melody import (
    Melody, Note, QuantizedMelody, QuantizedNote, Violation, RULE_DURATION, RULE_MONOPHONY,
    RULE_ORDER, RULE_PITCH_RANGE, bar_count, enforce_monophony, quantize, to_melody,
    transpose, validate,
)


class TestValidate(unittest.TestCase):
    """Melody invariants."""

    def test_valid_melody_has_no_violations(self):
        melody = Melody('m', 480, [(0, 480, 60), (480, 240, 62), (960, 480, 64)])
        self.assertEqual(validate(melody), [])

    def test_touching_notes_are_monophonic(self):
        melody = Melody('m', 480, [(0, 480, 60), (480, 480, 60)])
        self.assertEqual(validate(melody), [])

    def test_overlap_reported(self):
        melody = Melody('m', 480, [(0, 480, 60), (240, 480, 62)])
        self.assertEqual(validate(melody), [Violation(1, RULE_MONOPHONY)])

    def test_bad_values_reported(self):
        melody = Melody('m', 480, [(0, 0, 60), (480, 10, 128)])
        rules = [v.rule for v in validate(melody)]
        self.assertIn(RULE_DURATION, rules)
        self.assertIn(RULE_PITCH_RANGE, rules)

    def test_unsorted_reported(self):
        melody = Melody('m', 480, [(480, 10, 60), (0, 10, 62)])
        self.assertEqual([v.rule for v in validate(melody)], [RULE_ORDER])

    def test_notes_are_coerced_to_note_tuples(self):
        melody = Melody('m', 480, [[0, 480, 60]])
        self.assertIsInstance(melody.notes[0], Note)
        self.assertEqual(melody.bar_ticks, 1920)


class TestEnforceMonophony(unittest.TestCase):

    def test_overlap_truncated(self):
        melody = Melody('m', 480, [(0, 480, 60), (240, 480, 62)])
        self.assertEqual(enforce_monophony(melody).notes, ((0, 240, 60), (240, 480, 62)))

    def test_same_onset_removes_the_earlier_note(self):
        melody = Melody('m', 480, [(0, 480, 60), (0, 240, 62)])
        self.assertEqual(enforce_monophony(melody).notes, ((0, 240, 62),))

    def test_monophonic_input_unchanged(self):
        melody = Melody('m', 480, [(0, 480, 60), (480, 480, 62)])
        self.assertEqual(enforce_monophony(melody), melody)


class TestQuantize(unittest.TestCase):

    def test_quarter_notes(self):
        melody = Melody('m', 480, [(0, 480, 60), (480, 480, 62)])
        q = quantize(melody, 4)
        self.assertEqual(q.notes, (QuantizedNote(0, 4, 60), QuantizedNote(4, 4, 62)))
        self.assertEqual(q.total_steps, 16)
        self.assertEqual(q.dr, 4)

    def test_triplet_durations_depend_on_onset(self):
        # Eighth-note triplets on a sixteenth grid
        melody = Melody('m', 480, [(0, 160, 60), (160, 160, 62), (320, 160, 64)])
        q = quantize(melody, 4)
        self.assertEqual([n.duration for n in q.notes], [1, 2, 1])
        self.assertEqual([n.onset for n in q.notes], [0, 1, 3])

    def test_ties_round_up(self):
        # 15 ticks at tpqn 480 / DR 16 is exactly half a step
        melody = Melody('m', 480, [(15, 30, 60)])
        self.assertEqual(quantize(melody, 16).notes[0], QuantizedNote(1, 1, 60))

    def test_collapsed_note_dropped(self):
        melody = Melody('m', 480, [(0, 10, 60), (480, 480, 62)])
        self.assertEqual(quantize(melody, 4).notes, (QuantizedNote(4, 4, 62),))

    def test_total_steps_padded_to_whole_bars(self):
        melody = Melody('m', 480, [(0, 480 * 5, 60)])
        self.assertEqual(quantize(melody, 4).total_steps, 32)

    def test_empty_melody_is_one_bar(self):
        q = quantize(Melody('m', 480), 8)
        self.assertEqual(q.notes, ())
        self.assertEqual(q.total_steps, 32)

    def test_overlap_truncated_after_rounding(self):
        melody = Melody('m', 480, [(0, 190, 60), (170, 300, 62)])
        q = quantize(melody, 4)
        self.assertEqual(q.notes, (QuantizedNote(0, 1, 60), QuantizedNote(1, 3, 62)))

    def test_invalid_resolution(self):
        with self.assertRaises(InvalidConfigError):
            quantize(Melody('m', 480), 0)


class TestTranspose(unittest.TestCase):

    def test_shift(self):
        melody = Melody('m', 480, [(0, 480, 60), (480, 480, 64)])
        self.assertEqual(transpose(melody, 5).notes, ((0, 480, 65), (480, 480, 69)))

    def test_zero_shift_is_identity(self):
        melody = Melody('m', 480, [(0, 480, 60)])
        self.assertIs(transpose(melody, 0), melody)

    def test_out_of_range(self):
        with self.assertRaises(OutOfRangeError):
            transpose(Melody('m', 480, [(0, 480, 125)]), 3)
        with self.assertRaises(OutOfRangeError):
            transpose(Melody('m', 480, [(0, 480, 60)]), 128)


def test_to_melody_scales_steps_to_ticks():
    q = QuantizedMelody('m', 4, [(0, 4, 60), (6, 2, 62)], 16)
    melody = to_melody(q, 480, meter='4/4')
    assert melody.notes == ((0, 480, 60), (720, 240, 62))
    assert melody.meter == '4/4'
    assert quantize(melody, 4) == q


def test_to_melody_rejects_incompatible_tpqn():
    with pytest.raises(InvalidConfigError):
        to_melody(QuantizedMelody('m', 12, (), 48), 480 + 1)


@pytest.mark.parametrize("total_steps,dr,bars", [(16, 4, 1), (64, 4, 4), (96, 12, 2)])
def test_bar_count(total_steps, dr, bars):
    assert bar_count(QuantizedMelody('m', dr, (), total_steps)) == bars


def random_melody(rng, name, overlapping=False):
    """Sorted random melody at tpqn 480; overlapping notes and shared onsets when asked."""
    notes, t = [], int(rng.integers(0, 480))
    for _ in range(int(rng.integers(0, 24))):
        duration = int(rng.integers(1, 1200))
        notes.append((t, duration, int(rng.integers(40, 88))))
        if overlapping:
            t += int(rng.integers(0, 600))
        else:
            t += duration + int(rng.integers(0, 300))
    return Melody(name, 480, notes)


@pytest.mark.parametrize("dr", [4, 8])
def test_quantize_properties_on_random_melodies(dr):
    rng = np.random.default_rng(400 + dr)
    for i in range(300):
        melody = random_melody(rng, f"r{i}", overlapping=i % 3 == 0)
        q = quantize(melody, dr)
        assert q.total_steps % (4 * dr) == 0
        assert q.total_steps >= max((n.onset + n.duration for n in q.notes), default=0)
        assert all(n.duration >= 1 for n in q.notes)
        assert validate(to_melody(q, 480)) == []
        # Quantizing an already quantized melody changes nothing
        assert quantize(to_melody(q, 480), dr) == q
        shift = int(rng.integers(-6, 7))
        shifted = quantize(transpose(melody, shift), dr)
        assert [(n.onset, n.duration) for n in shifted.notes] == [(n.onset, n.duration) for n in q.notes]
        assert shifted.pitches == [p + shift for p in q.pitches]
        assert shifted.total_steps == q.total_steps


def test_enforce_monophony_on_random_melodies():
    rng = np.random.default_rng(11)
    for i in range(300):
        melody = random_melody(rng, f"r{i}", overlapping=True)
        result = enforce_monophony(melody)
        assert validate(result) == []
        assert all(n.duration >= 1 for n in result.notes)
        originals = {(n.onset, n.pitch): n.duration for n in melody.notes}
        for note in result.notes:
            assert note.duration <= originals[(note.onset, note.pitch)]


if __name__ == '__main__':
    unittest.main()
