import unittest
import os
import sys
import tempfile

# Add the project root to the Python path so we can import modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from modules.codec import RULE_GRID_CLOCK, RULE_GRID_COUNT, parse_tokens, validate_sequence
from modules.corpus import (
    Corpus, encode_corpus, load_token_file, truncate_tokens, write_id_file, write_token_file,
)
from modules.error_analytics import ErrorTracker
from modules.error_handler import InvalidConfigError, TokenLookupError
from modules.melody import Melody
from modules.vocabulary import EncodingConfig, build_vocabulary

STEP_TICKS = 120  # one sixteenth at tpqn 480
EXAMPLE_STEPS = [(0, 4, 62), (4, 1, 64), (5, 2, 65), (7, 1, 67), (8, 4, 65), (12, 2, 60), (14, 6, 62)]
EXAMPLE = Melody('example', 480, [(o * STEP_TICKS, d * STEP_TICKS, p) for o, d, p in EXAMPLE_STEPS])

SINGLE_PR4 = EncodingConfig.from_names('number', 'single', 4, 4)
NO_GRID = EncodingConfig.from_names('number', 'single', 0, 4)


class TestTokenFiles(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_encode_corpus_from_ticks(self):
        (seq,) = encode_corpus(Corpus((EXAMPLE,)), SINGLE_PR4)
        self.assertEqual(
            seq.text(),
            'BAR POS p62 d4 POS p64 d1 p65 d2 p67 d1 POS p65 d4 POS p60 d2 p62 d6 BAR POS POS POS POS',
        )
        self.assertEqual(seq.name, 'example')

    def test_write_and_load(self):
        sequences = encode_corpus(Corpus((EXAMPLE, Melody('rest', 480))), SINGLE_PR4)
        write_token_file(self.path('train.tokens'), sequences)
        loaded = load_token_file(self.path('train.tokens'), SINGLE_PR4, tracker=ErrorTracker())
        self.assertEqual([s.tokens for s in loaded], [s.tokens for s in sequences])
        self.assertEqual([s.name for s in loaded], ['train-000001', 'train-000002'])

    def test_unknown_token_reported_with_line(self):
        with open(self.path('bad.tokens'), 'w', encoding='utf-8') as f:
            f.write('BAR POS p60 d16 POS POS POS\nBAR POS0 p60 d16\n\nREST d16\n')
        tracker = ErrorTracker()
        loaded = load_token_file(self.path('bad.tokens'), SINGLE_PR4, tracker=tracker)
        self.assertEqual([s.name for s in loaded], ['bad-000001', 'bad-000003', 'bad-000004'])
        self.assertEqual(len(loaded[1]), 0)
        self.assertEqual(tracker.diagnostics[0].line, 2)
        self.assertEqual(tracker.diagnostics[0].category, 'lookup')

    def test_strict_load_raises(self):
        with open(self.path('bad.tokens'), 'w', encoding='utf-8') as f:
            f.write('p200 d4\n')
        with self.assertRaises(TokenLookupError):
            load_token_file(self.path('bad.tokens'), NO_GRID, strict=True)

    def test_id_file(self):
        vocab = build_vocabulary(NO_GRID)
        seq = parse_tokens(vocab, 'p60 d4 REST d2')
        write_id_file(self.path('train.ids'), [seq, parse_tokens(vocab, '')], vocab)
        with open(self.path('train.ids'), encoding='utf-8') as f:
            lines = f.read().split('\n')
        expected = ' '.join(str(vocab.text_to_id(t)) for t in ('p60', 'd4', 'REST', 'd2'))
        self.assertEqual(lines, [expected, '', ''])


class TestTruncateTokens(unittest.TestCase):

    def setUp(self):
        self.vocab = build_vocabulary(NO_GRID)
        self.seq = parse_tokens(self.vocab, 'p60 d16 d4 p62 d4', name='s')

    def truncated(self, max_len, seq=None):
        return truncate_tokens(seq or self.seq, max_len).text()

    def test_cut_on_unit_boundaries(self):
        self.assertEqual(self.truncated(2), '')
        self.assertEqual(self.truncated(3), 'p60 d16 d4')
        self.assertEqual(self.truncated(4), 'p60 d16 d4')
        self.assertEqual(self.truncated(5), 'p60 d16 d4 p62 d4')

    def test_short_sequence_unchanged(self):
        self.assertIs(truncate_tokens(self.seq, 10), self.seq)
        self.assertEqual(truncate_tokens(self.seq, 3).name, 's')

    def test_class_octave_kept_together(self):
        vocab = build_vocabulary(EncodingConfig.from_names('class-octave', 'single', 0, 4))
        seq = parse_tokens(vocab, 'C o4 d4 D o4 d4')
        self.assertEqual(self.truncated(2, seq), '')
        self.assertEqual(self.truncated(4, seq), 'C o4 d4')
        self.assertEqual(self.truncated(5, seq), 'C o4 d4')

    def test_grid_tokens_are_boundaries(self):
        vocab = build_vocabulary(SINGLE_PR4)
        seq = parse_tokens(vocab, 'BAR POS p62 d4 POS')
        self.assertEqual(self.truncated(1, seq), 'BAR')
        self.assertEqual(self.truncated(3, seq), 'BAR POS')

    def test_invalid_length(self):
        with self.assertRaises(InvalidConfigError):
            truncate_tokens(self.seq, 0)

    def test_truncated_prefixes_are_grammatical(self):
        for config in (SINGLE_PR4, EncodingConfig.from_names('class-octave', 'multiple', 16, 4)):
            vocab = build_vocabulary(config)
            (seq,) = encode_corpus(Corpus((EXAMPLE,)), config)
            for max_len in range(1, len(seq) + 1):
                prefix = truncate_tokens(seq, max_len)
                self.assertLessEqual(len(prefix), max_len)
                grammar = [v for v in validate_sequence(prefix, vocab)
                           if v.rule not in (RULE_GRID_CLOCK, RULE_GRID_COUNT)]
                self.assertEqual(grammar, [], f"{config.name} max_len={max_len}")


if __name__ == '__main__':
    unittest.main()
