import unittest
import math
import os
import random
import sys
from collections import Counter

import pytest

# Add the project root to the Python path so we can import modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from modules.codec import decode, encode
from modules.const import METRIC_NAMES
from modules.error_handler import UndefinedMetricError
from modules.melody import QuantizedMelody, quantize, to_melody, transpose
from modules.metrics import (
    MetricReport, duration_entropy, empty_beat_rate, groove_consistency, mai,
    major_scale_rate_sd, mean_duration, pitch_class_entropy, pitch_entropy, report,
    report_many, scale_consistency,
)
from modules.vocabulary import EncodingConfig, build_vocabulary

EXAMPLE = QuantizedMelody(
    'example', 4,
    [(0, 4, 62), (4, 1, 64), (5, 2, 65), (7, 1, 67), (8, 4, 65), (12, 2, 60), (14, 6, 62)],
    32,
)
MAJOR = (0, 2, 4, 5, 7, 9, 11)
MINOR = (0, 2, 3, 5, 7, 8, 10)


def melody_of(pitches, duration=4, dr=4, bars=None):
    notes = [(i * duration, duration, p) for i, p in enumerate(pitches)]
    end = len(pitches) * duration
    bar = 4 * dr
    total = bars * bar if bars else max(bar, -(-end // bar) * bar)
    return QuantizedMelody('m', dr, notes, total)


# Brute-force oracles, independent of the code under test

def oracle_entropy(values):
    counts = Counter(values)
    n = len(values)
    return -sum(c / n * math.log2(c / n) for c in counts.values())


def oracle_rates(pitches, template):
    return [sum(1 for p in pitches if (p - root) % 12 in template) / len(pitches) for root in range(12)]


def oracle_gc(q):
    bar = 4 * q.dr
    bars = q.total_steps // bar
    onsets = {n.onset for n in q.notes}
    grids = [[(b * bar + s) in onsets for s in range(bar)] for b in range(bars)]
    sims = [1 - sum(x != y for x, y in zip(grids[b], grids[b + 1])) / bar for b in range(bars - 1)]
    return sum(sims) / len(sims)


def oracle_ebr(q):
    beats = q.total_steps // q.dr
    empty = 0
    for beat in range(beats):
        start, stop = beat * q.dr, (beat + 1) * q.dr
        if not any(n.onset < stop and n.onset + n.duration > start for n in q.notes):
            empty += 1
    return empty / beats


def random_melody(rng, dr=4):
    bar = 4 * dr
    span = rng.randint(1, 4) * bar
    notes, t = [], 0
    while t < span and len(notes) < 40:
        t += rng.choice([0, 0, 1, dr])
        if t >= span:
            break
        duration = rng.randint(1, min(span - t, bar))
        notes.append((t, duration, rng.randint(30, 96)))
        t += duration
    end = notes[-1][0] + notes[-1][1] if notes else 0
    return QuantizedMelody('r', dr, notes, max(bar, -(-end // bar) * bar))


class TestPitchMetrics(unittest.TestCase):

    def test_mai(self):
        self.assertEqual(mai(melody_of([60, 64, 67, 72])), 4.0)
        self.assertEqual(mai(melody_of([60, 60, 60])), 0.0)
        self.assertAlmostEqual(mai(EXAMPLE), 14 / 6, places=12)
        with self.assertRaises(UndefinedMetricError):
            mai(melody_of([60]))

    def test_entropies(self):
        chromatic = melody_of(range(60, 72))
        self.assertAlmostEqual(pitch_class_entropy(chromatic), math.log2(12), places=12)
        same = melody_of([60] * 5)
        self.assertEqual(pitch_entropy(same), 0.0)
        self.assertEqual(pitch_class_entropy(same), 0.0)
        self.assertEqual(duration_entropy(same), 0.0)
        octaves = melody_of([60, 60, 72])
        self.assertAlmostEqual(pitch_entropy(octaves), 0.9182958340544896, places=12)
        self.assertEqual(pitch_class_entropy(octaves), 0.0)
        with self.assertRaises(UndefinedMetricError):
            pitch_entropy(QuantizedMelody('e', 4, (), 16))

    def test_scale_consistency(self):
        self.assertEqual(scale_consistency(melody_of([60, 62, 64, 65, 67, 69, 71, 72])), 1.0)
        self.assertAlmostEqual(scale_consistency(melody_of(range(60, 72))), 7 / 12, places=12)
        self.assertEqual(scale_consistency(melody_of([61])), 1.0)

    def test_harmonic_minor_option(self):
        # A harmonic minor: the raised seventh is outside every major scale with the rest
        a_harmonic = melody_of([57, 59, 60, 62, 64, 65, 68])
        self.assertLess(scale_consistency(a_harmonic), 1.0)
        self.assertEqual(scale_consistency(a_harmonic, harmonic_minor=True), 1.0)

    def test_msd(self):
        expected = math.sqrt((7 * (5 / 12) ** 2 + 5 * (7 / 12) ** 2) / 12)
        self.assertAlmostEqual(major_scale_rate_sd(melody_of([60, 72, 48])), expected, places=12)
        self.assertAlmostEqual(major_scale_rate_sd(melody_of(range(60, 72))), 0.0, places=12)


class TestRhythmMetrics(unittest.TestCase):

    def test_mean_duration(self):
        self.assertEqual(mean_duration(melody_of([60, 62])), 1.0)
        self.assertAlmostEqual(mean_duration(EXAMPLE), 20 / 28, places=12)
        self.assertEqual(mean_duration(QuantizedMelody('w', 8, [(0, 32, 60)], 32)), 4.0)

    def test_groove_consistency(self):
        two_same = QuantizedMelody('g', 4, [(0, 4, 60), (8, 4, 62), (16, 4, 60), (24, 4, 62)], 32)
        self.assertEqual(groove_consistency(two_same), 1.0)
        full_then_empty = QuantizedMelody('g', 4, [(s, 1, 60) for s in range(16)], 32)
        self.assertEqual(groove_consistency(full_then_empty), 0.0)
        self.assertEqual(groove_consistency(EXAMPLE), 9 / 16)
        with self.assertRaises(UndefinedMetricError):
            groove_consistency(melody_of([60]))

    def test_empty_beat_rate(self):
        self.assertEqual(empty_beat_rate(QuantizedMelody('w', 4, [(0, 16, 60)], 16)), 0.0)
        self.assertEqual(empty_beat_rate(QuantizedMelody('q', 4, [(0, 4, 60)], 16)), 0.75)
        self.assertEqual(empty_beat_rate(QuantizedMelody('h', 4, [(0, 16, 60)], 32)), 0.5)
        self.assertEqual(empty_beat_rate(EXAMPLE), 3 / 8)


class TestReport(unittest.TestCase):

    def test_undefined_metrics_are_none(self):
        result = report(QuantizedMelody('one', 4, [(0, 4, 60)], 16))
        self.assertIsNone(result.mai)
        self.assertIsNone(result.gc)
        self.assertEqual(result.sc, 1.0)
        self.assertEqual(result.ebr, 0.75)
        self.assertEqual(result.as_row()[0], 'one')
        self.assertEqual(len(result.values()), len(METRIC_NAMES))

    def test_empty_melody_report(self):
        result = report(QuantizedMelody('e', 4, (), 16))
        self.assertEqual(result.defined(), {'ebr': 1.0})

    def test_report_many_keeps_order(self):
        reports = report_many([EXAMPLE, melody_of([60, 62])])
        self.assertEqual([r.id for r in reports], ['example', 'm'])
        self.assertIsInstance(reports[0], MetricReport)


def test_metrics_match_oracles_on_random_melodies():
    rng = random.Random(2024)
    for _ in range(200):
        q = random_melody(rng, dr=rng.choice([4, 8]))
        if len(q.notes) < 2:
            continue
        pitches = [n.pitch for n in q.notes]
        got = report(q)
        intervals = [abs(b - a) for a, b in zip(pitches, pitches[1:])]
        assert got.mai == pytest.approx(sum(intervals) / len(intervals), rel=1e-12)
        assert got.h_p == pytest.approx(oracle_entropy(pitches), rel=1e-12, abs=1e-15)
        assert got.h_pc == pytest.approx(oracle_entropy([p % 12 for p in pitches]), rel=1e-12, abs=1e-15)
        assert got.h_d == pytest.approx(oracle_entropy([n.duration for n in q.notes]), rel=1e-12, abs=1e-15)
        best = max(max(oracle_rates(pitches, MAJOR)), max(oracle_rates(pitches, MINOR)))
        assert got.sc == pytest.approx(best, rel=1e-12)
        rates = oracle_rates(pitches, MAJOR)
        mean = sum(rates) / 12
        sd = math.sqrt(sum((r - mean) ** 2 for r in rates) / 12)
        assert got.msd == pytest.approx(sd, rel=1e-12, abs=1e-15)
        assert got.md == pytest.approx(sum(n.duration for n in q.notes) / len(q.notes) / q.dr, rel=1e-12)
        if q.total_steps >= 2 * 4 * q.dr:
            assert got.gc == pytest.approx(oracle_gc(q), rel=1e-12)
        else:
            assert got.gc is None
        assert got.ebr == pytest.approx(oracle_ebr(q), rel=1e-12, abs=1e-15)


def test_metrics_invariant_under_transposition():
    rng = random.Random(5)
    for _ in range(100):
        q = random_melody(rng)
        melody = to_melody(q, 480)
        base = report(q)
        for shift in range(-6, 7):
            moved = quantize(transpose(melody, shift), 4)
            assert report(moved).values() == base.values()


def test_octave_shift_keeps_pitch_class_metrics():
    q = melody_of([60, 62, 64, 67, 69])
    shifted = melody_of([48, 62, 76, 67, 57])
    for func in (pitch_class_entropy, scale_consistency, major_scale_rate_sd):
        assert func(shifted) == func(q)


@pytest.mark.parametrize("pitch,pc,pr", [('number', 'single', 16), ('class-octave', 'multiple', 4)])
def test_metrics_survive_codec_round_trip(pitch, pc, pr):
    vocab = build_vocabulary(EncodingConfig.from_names(pitch, pc, pr, 4))
    rng = random.Random(11)
    for _ in range(50):
        q = random_melody(rng)
        assert report(decode(encode(q, vocab), vocab)) == report(q)
