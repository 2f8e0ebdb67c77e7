"""
Command handlers for the melodytok CLI.

Each handler takes the parsed argparse namespace and returns an exit code:
0 when the run produced no record-level failures, 1 otherwise. Data goes to
files or stdout; logs and diagnostics go to stderr.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from modules.codec import decode
from modules.const import Defaults, Files, METRIC_NAMES
from modules.corpus import (
    Corpus, SplitSpec, augment_epoch, encode_corpus, filter_four_four, filter_min_notes,
    import_midi_paths, load_melodies, load_token_file, save_melodies, split,
    truncate_tokens, write_id_file, write_token_file,
)
from modules.corpus.corpus import dumps_melodies, report_problem
from modules.corpus.midi_parser import export_midi_dir
from modules.error_analytics import ErrorTracker, error_tracker
from modules.error_handler import (
    InvalidConfigError, MalformedSequenceError, handle_errors,
)
from modules.file_manager import (
    atomic_write_text, echo_run_config, format_table, parse_optional_float, read_table, render_tsv, write_table,
)
from modules.melody import QuantizedMelody, quantize, to_melody
from modules.metrics import REPORT_HEADERS, MetricReport, metric_column, report_many
from modules.stats import (
    DistributionComparison, TestOutcome, build_kde, compare_sets, density_table,
    run_metric_tests,
)
from modules.utils import input_kind, list_midi_files
from modules.vocabulary import EncodingConfig, build_vocabulary

general_logger = logging.getLogger('general_logger')

FORMAT_TABLE = 'table'
FORMAT_TSV = 'tsv'


@dataclass(frozen=True)
class CliConfig:
    """Options shared by all commands."""
    encoding: EncodingConfig
    seed: int = Defaults.SEED
    alpha: float = Defaults.ALPHA
    output_format: str = FORMAT_TABLE
    output: Optional[str] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'CliConfig':
        encoding = EncodingConfig.from_names(
            getattr(args, 'pitch', Defaults.PITCH_MODE),
            getattr(args, 'pc', Defaults.POSITION_COMPLEXITY),
            getattr(args, 'pr', Defaults.POSITION_RESOLUTION),
            getattr(args, 'dr', Defaults.DURATION_RESOLUTION),
        )
        return cls(
            encoding=encoding,
            seed=getattr(args, 'seed', Defaults.SEED),
            alpha=getattr(args, 'alpha', Defaults.ALPHA),
            output_format=getattr(args, 'format', FORMAT_TABLE),
            output=getattr(args, 'output', None),
        )

    def run_config(self, command: str, **extra: Any) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "command": command,
            "encoding": self.encoding.to_dict(),
            "seed": self.seed,
            "alpha": self.alpha,
        }
        payload.update(extra)
        return payload


def _start(command: str, tracker: ErrorTracker = error_tracker) -> ErrorTracker:
    tracker.reset()
    general_logger.info(f"Running {command}")
    return tracker


def _finish(command: str, tracker: ErrorTracker) -> int:
    if tracker.get_error_summary()["total_errors"]:
        general_logger.warning(f"{command}: {tracker.format_summary()}")
    if tracker.has_failures():
        general_logger.error(f"{command} finished with {tracker.failure_count} failed record(s)")
        return 1
    general_logger.info(f"{command} finished")
    return 0


def _write_stdout(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def emit_table(cli: CliConfig, headers: Sequence[str], rows: List[Sequence[Any]],
               float_format: str = '.4g') -> None:
    """TSV to -o when given, otherwise the chosen format to stdout."""
    if cli.output:
        write_table(cli.output, headers, rows)
    elif cli.output_format == FORMAT_TSV:
        _write_stdout(render_tsv(headers, rows))
    else:
        _write_stdout(format_table(headers, rows, float_format=float_format))


def _emit_text(output: Optional[str], text: str) -> None:
    if output:
        atomic_write_text(output, text)
        general_logger.info(f"Wrote {output}")
    else:
        _write_stdout(text)


def load_melody_input(path: str, tracker: ErrorTracker, repair: bool = False) -> Corpus:
    """Melody file, MIDI file or directory of MIDI files."""
    kind = input_kind(path)
    if kind == 'midi':
        paths = list_midi_files(path) if os.path.isdir(path) else [path]
        return import_midi_paths(paths, tracker=tracker)
    if kind == 'tokens':
        raise InvalidConfigError(f"{path} is a token file; a melody or MIDI input is required",
                                 context={"source": path})
    return load_melodies(path, tracker=tracker, repair=repair)


def _line_of(name: str) -> Optional[int]:
    try:
        return int(name.rsplit('-', 1)[1])
    except (IndexError, ValueError):
        return None


def decode_token_input(path: str, config: EncodingConfig, tracker: ErrorTracker) -> List[QuantizedMelody]:
    """Load and decode a token file; malformed lines are reported and skipped."""
    vocab = build_vocabulary(config)
    melodies = []
    for seq in load_token_file(path, config, tracker=tracker):
        try:
            melodies.append(decode(seq, vocab))
        except MalformedSequenceError as e:
            e.context.update({"source": path, "line": _line_of(seq.name)})
            report_problem(e, tracker)
    return melodies


def load_quantized_input(path: str, config: EncodingConfig, tracker: ErrorTracker) -> List[QuantizedMelody]:
    """Any supported input as quantized melodies at the config's DR."""
    if input_kind(path) == 'tokens':
        return decode_token_input(path, config, tracker)
    corpus = load_melody_input(path, tracker)
    return [quantize(m, config.duration_resolution) for m in corpus]


@handle_errors()
def cmd_prepare(args: argparse.Namespace) -> int:
    """Load, filter, split and write train/test melody files."""
    cli = CliConfig.from_args(args)
    tracker = _start('prepare')

    corpus = load_melody_input(args.input, tracker, repair=args.repair)
    stages: List[Tuple[str, int, int]] = [('load', len(corpus), 0)]

    filtered = filter_four_four(corpus, bar_check=args.bar_check)
    stages.append(('four_four', len(filtered), len(corpus) - len(filtered)))
    corpus = filtered
    if args.min_notes:
        filtered = filter_min_notes(corpus, args.min_notes)
        stages.append(('min_notes', len(filtered), len(corpus) - len(filtered)))
        corpus = filtered

    train, test = split(corpus, SplitSpec(args.train_fraction, cli.seed))
    stages.append(('train', len(train), 0))
    stages.append(('test', len(test), 0))

    save_melodies(train, os.path.join(args.out_dir, Files.TRAIN))
    save_melodies(test, os.path.join(args.out_dir, Files.TEST))
    echo_run_config(args.out_dir, cli.run_config(
        'prepare', input=args.input, train_fraction=args.train_fraction,
        bar_check=args.bar_check, min_notes=args.min_notes, repair=args.repair,
    ))
    emit_table(cli, ('stage', 'kept', 'filtered'), stages)
    return _finish('prepare', tracker)


@handle_errors()
def cmd_encode(args: argparse.Namespace) -> int:
    """Melodies to a token file (and optionally an id file)."""
    cli = CliConfig.from_args(args)
    tracker = _start('encode')
    corpus = load_melody_input(args.input, tracker)
    sequences = encode_corpus(corpus, cli.encoding, tracker=tracker)
    if args.max_len:
        sequences = [truncate_tokens(seq, args.max_len) for seq in sequences]

    if cli.output:
        write_token_file(cli.output, sequences)
    else:
        _write_stdout("".join(seq.text() + "\n" for seq in sequences))
    if args.ids:
        write_id_file(args.ids, sequences, build_vocabulary(cli.encoding))
    return _finish('encode', tracker)


@handle_errors()
def cmd_decode(args: argparse.Namespace) -> int:
    """Token file to a melody file, trusting note and rest durations only."""
    cli = CliConfig.from_args(args)
    tracker = _start('decode')
    quantized = decode_token_input(args.input, cli.encoding, tracker)
    melodies = [to_melody(q, args.tpqn) for q in quantized]

    _emit_text(cli.output, dumps_melodies(melodies))
    if args.midi_dir:
        export_midi_dir(melodies, args.midi_dir)
        echo_run_config(args.midi_dir, cli.run_config('decode', input=args.input, tpqn=args.tpqn))
    return _finish('decode', tracker)


@handle_errors()
def cmd_vocab(args: argparse.Namespace) -> int:
    """Dump `<id>\\t<text>` for the configured vocabulary."""
    cli = CliConfig.from_args(args)
    vocab = build_vocabulary(cli.encoding)
    _emit_text(cli.output, vocab.dump())
    general_logger.info(f"{cli.encoding.name}: {len(vocab)} tokens")
    return 0


@handle_errors()
def cmd_metrics(args: argparse.Namespace) -> int:
    """Nine-metric table, one row per melody."""
    cli = CliConfig.from_args(args)
    tracker = _start('metrics')
    quantized = load_quantized_input(args.input, cli.encoding, tracker)
    reports = report_many(quantized, harmonic_minor=args.harmonic_minor)
    emit_table(cli, REPORT_HEADERS, [r.as_row() for r in reports])
    return _finish('metrics', tracker)


def dump_kde(directory: str, model_reports: Sequence[MetricReport], reference_reports: Sequence[MetricReport],
             comparisons: Sequence[DistributionComparison]) -> None:
    for comparison in comparisons:
        if comparison.oa is None:
            continue
        name = comparison.metric_name
        grid, pdf_model, pdf_reference = density_table(
            build_kde(metric_column(model_reports, name)),
            build_kde(metric_column(reference_reports, name)),
        )
        rows = [(float(x), float(a), float(b)) for x, a, b in zip(grid, pdf_model, pdf_reference)]
        write_table(os.path.join(directory, f"kde_{name}.tsv"), ('x', 'model', 'reference'), rows)


@handle_errors()
def cmd_compare(args: argparse.Namespace) -> int:
    """Per-metric OA and W1 between a model sample set and a reference set."""
    cli = CliConfig.from_args(args)
    tracker = _start('compare')
    model_reports = report_many(load_quantized_input(args.model, cli.encoding, tracker),
                                harmonic_minor=args.harmonic_minor)
    reference_reports = report_many(load_quantized_input(args.reference, cli.encoding, tracker),
                                    harmonic_minor=args.harmonic_minor)
    comparisons = compare_sets(model_reports, reference_reports)
    emit_table(cli, DistributionComparison.HEADERS, [c.as_row() for c in comparisons])

    if args.dump_kde:
        dump_kde(args.dump_kde, model_reports, reference_reports, comparisons)
        echo_run_config(args.dump_kde, cli.run_config('compare', model=args.model,
                                                      reference=args.reference))
    return _finish('compare', tracker)


def read_comparison_table(path: str, statistic: str) -> Dict[str, Optional[float]]:
    """{metric: value} from a compare table written with -o."""
    rows = read_table(path)
    if rows and statistic not in rows[0]:
        raise InvalidConfigError(f"{path} has no '{statistic}' column", context={"source": path})
    return {row['metric']: parse_optional_float(row.get(statistic)) for row in rows}


@handle_errors()
def cmd_test(args: argparse.Namespace) -> int:
    """Paired tests over comparison tables of two run groups, Holm-Bonferroni corrected."""
    cli = CliConfig.from_args(args)
    tracker = _start('test')
    group_a = [read_comparison_table(path, args.statistic) for path in args.group_a]
    group_b = [read_comparison_table(path, args.statistic) for path in args.group_b]
    outcomes, skipped = run_metric_tests(group_a, group_b, METRIC_NAMES, cli.alpha,
                                         method=args.method)
    for name, reason in skipped:
        general_logger.warning(f"{name} skipped: {reason}")
    emit_table(cli, TestOutcome.HEADERS, [t.as_row() for t in outcomes], float_format='.3g')
    return _finish('test', tracker)


@handle_errors()
def cmd_augment(args: argparse.Namespace) -> int:
    """Write one randomly transposed epoch of a melody file."""
    cli = CliConfig.from_args(args)
    tracker = _start('augment')
    corpus = load_melody_input(args.input, tracker)
    augmented = augment_epoch(corpus, cli.seed, args.low, args.high, epoch=args.epoch)
    if cli.output:
        save_melodies(augmented, cli.output)
    else:
        _write_stdout(dumps_melodies(augmented.melodies))
    return _finish('augment', tracker)

