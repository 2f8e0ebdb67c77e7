"""
Main entry point for the melodytok command-line tool.
Handles argument parsing and command dispatch.
"""
import argparse
import sys
from datetime import datetime
from typing import List, Optional

from modules.commands import (
    FORMAT_TABLE, FORMAT_TSV, cmd_augment, cmd_compare, cmd_decode, cmd_encode,
    cmd_metrics, cmd_prepare, cmd_test, cmd_vocab,
)
from modules.const import Defaults, TIMEZONE
from modules.error_handler import ErrorCategory, ErrorHandler, ErrorSeverity
from modules.logger import error_logger, general_logger
from modules.stats import METHOD_APPROX, METHOD_AUTO, METHOD_EXACT, METHOD_TTEST
from modules.vocabulary import PitchMode, PositionComplexity

COMMANDS = {
    'prepare': cmd_prepare,
    'encode': cmd_encode,
    'decode': cmd_decode,
    'vocab': cmd_vocab,
    'metrics': cmd_metrics,
    'compare': cmd_compare,
    'test': cmd_test,
    'augment': cmd_augment,
}


def _encoding_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('encoding')
    group.add_argument('--pitch', choices=[m.value for m in PitchMode], default=Defaults.PITCH_MODE,
                       help='pitch encoding (default: %(default)s)')
    group.add_argument('--pc', choices=[c.value for c in PositionComplexity],
                       default=Defaults.POSITION_COMPLEXITY,
                       help='grid position complexity; forced to undefined when PR <= 1')
    group.add_argument('--pr', type=int, default=Defaults.POSITION_RESOLUTION,
                       help='grid positions per bar, 0 disables the grid (default: %(default)s)')
    group.add_argument('--dr', type=int, default=Defaults.DURATION_RESOLUTION,
                       help='steps per quarter note (default: %(default)s)')
    return parser


def _output_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('-o', '--output', help='write to this file instead of stdout')
    parser.add_argument('--format', choices=[FORMAT_TABLE, FORMAT_TSV], default=FORMAT_TABLE,
                        help='stdout rendering of tables (default: %(default)s)')
    return parser


def build_parser() -> argparse.ArgumentParser:
    encoding = _encoding_options()
    output = _output_options()
    parser = argparse.ArgumentParser(
        prog='melodytok',
        description='Configurable melody token encodings and objective evaluation.',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    prepare = sub.add_parser('prepare', parents=[output], help='filter and split a corpus')
    prepare.add_argument('input', help='melody file, MIDI file or directory of MIDI files')
    prepare.add_argument('out_dir', help='directory for train/test files')
    prepare.add_argument('--train-fraction', type=float, default=Defaults.TRAIN_FRACTION)
    prepare.add_argument('--seed', type=int, default=Defaults.SEED)
    prepare.add_argument('--bar-check', action='store_true',
                         help='drop melodies declaring a meter other than 4/4')
    prepare.add_argument('--min-notes', type=int, default=0)
    prepare.add_argument('--repair', action='store_true',
                         help='truncate overlapping notes instead of rejecting the melody')

    encode = sub.add_parser('encode', parents=[encoding], help='melodies to tokens')
    encode.add_argument('input')
    encode.add_argument('-o', '--output', help='token file (default: stdout)')
    encode.add_argument('--ids', help='also write an integer-id file')
    encode.add_argument('--max-len', type=int, default=0,
                        help='truncate sequences at a unit boundary (default: no limit)')

    decode = sub.add_parser('decode', parents=[encoding], help='tokens to melodies')
    decode.add_argument('input', help='token file')
    decode.add_argument('-o', '--output', help='melody file (default: stdout)')
    decode.add_argument('--tpqn', type=int, default=Defaults.TPQN)
    decode.add_argument('--midi-dir', help='also export one MIDI file per melody')

    vocab = sub.add_parser('vocab', parents=[encoding], help='dump the vocabulary')
    vocab.add_argument('-o', '--output')

    metrics = sub.add_parser('metrics', parents=[encoding, output], help='per-melody metric table')
    metrics.add_argument('input', help='melody, MIDI or token file')
    metrics.add_argument('--harmonic-minor', action='store_true')

    compare = sub.add_parser('compare', parents=[encoding, output], help='OA and W1 per metric')
    compare.add_argument('model')
    compare.add_argument('reference')
    compare.add_argument('--harmonic-minor', action='store_true')
    compare.add_argument('--dump-kde', help='directory for per-metric density tables')

    test = sub.add_parser('test', parents=[output], help='paired tests over comparison tables')
    test.add_argument('--group-a', nargs='+', required=True, help='comparison tables of group A')
    test.add_argument('--group-b', nargs='+', required=True, help='paired comparison tables of group B')
    test.add_argument('--alpha', type=float, default=Defaults.ALPHA)
    test.add_argument('--statistic', choices=['oa', 'w1'], default='oa')
    test.add_argument('--method', choices=[METHOD_AUTO, METHOD_EXACT, METHOD_APPROX, METHOD_TTEST],
                      default=METHOD_AUTO, help='Wilcoxon variant or the paired t-test')

    augment = sub.add_parser('augment', help='write one transposed epoch')
    augment.add_argument('input')
    augment.add_argument('-o', '--output')
    augment.add_argument('--seed', type=int, default=Defaults.SEED)
    augment.add_argument('--epoch', type=int, default=0)
    augment.add_argument('--low', type=int, default=-Defaults.MAX_TRANSPOSITION)
    augment.add_argument('--high', type=int, default=Defaults.MAX_TRANSPOSITION)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments and run one command."""
    args = build_parser().parse_args(argv)
    general_logger.debug(f"Command line: {args}")
    try:
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        error_logger.error("Interrupted")
        return 130
    except Exception as e:
        standard_error = ErrorHandler.create_error(
            message=f"{args.command} failed", severity=ErrorSeverity.CRITICAL,
            category=ErrorCategory.GENERAL,
            context={"python_version": sys.version, "time": datetime.now(TIMEZONE).isoformat()},
            original_exception=e,
        )
        error_logger.critical(ErrorHandler.format_error_message(standard_error, prefix="Fatal"))
        return 1


if __name__ == '__main__':
    sys.exit(main())
