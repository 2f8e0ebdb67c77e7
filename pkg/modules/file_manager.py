import os
import io
import csv
import json
import tempfile
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

from modules.const import Files

logger = logging.getLogger('general_logger')

FLOAT_FORMAT = '.12g'


def ensure_directory(path: str) -> None:
    """
    Ensure a directory exists.

    Args:
        path: Directory path to create
    """
    if path:
        os.makedirs(path, exist_ok=True)


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write bytes to path through a temp file in the same directory and a rename.

    Args:
        path: Destination file
        data: Full file content
    """
    directory = os.path.dirname(os.path.abspath(path))
    ensure_directory(directory)
    fd, tmp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_text(path: str, text: str) -> None:
    """UTF-8 variant of atomic_write_bytes."""
    atomic_write_bytes(path, text.encode('utf-8'))


def format_cell(value: Any) -> str:
    """Render one table cell; None is an empty field, floats use a fixed format."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def render_tsv(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Tab-delimited rendering with a header row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter='\t', lineterminator='\n')
    writer.writerow(headers)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def format_table(headers: Sequence[str], rows: Iterable[Sequence[Any]],
                 float_format: str = '.4g') -> str:
    """Aligned plain-text table for terminals."""
    def cell(value: Any) -> str:
        if isinstance(value, float) and not isinstance(value, bool):
            return format(value, float_format)
        return format_cell(value) or '-'

    body = [[cell(value) for value in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in body:
        for i, value in enumerate(row):
            widths[i] = max(widths[i], len(value))
    lines = ['  '.join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append('  '.join('-' * w for w in widths))
    for row in body:
        lines.append('  '.join(value.ljust(widths[i]) for i, value in enumerate(row)))
    return '\n'.join(lines) + '\n'


def write_table(path: str, headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Atomically write a TSV table with a header row.

    Args:
        path: Output file
        headers: Column names
        rows: Row values (None becomes an empty field)
    """
    atomic_write_text(path, render_tsv(headers, rows))
    logger.info(f"Wrote table: {path}")


def read_table(path: str) -> List[Dict[str, str]]:
    """Read a TSV table written by write_table.

    Args:
        path: Input file

    Returns:
        List[Dict[str, str]]: One dict per row keyed by header
    """
    with open(path, mode='r', newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f, delimiter='\t')
        return [dict(row) for row in reader]


def parse_optional_float(value: Optional[str]) -> Optional[float]:
    """Inverse of format_cell for numeric columns."""
    if value is None or value.strip() == '':
        return None
    return float(value)


def echo_run_config(out_dir: str, payload: Dict[str, Any]) -> str:
    """Write the run configuration next to the outputs for provenance.

    Returns:
        str: Path of the written file
    """
    path = os.path.join(out_dir, Files.RUN_CONFIG)
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + '\n')
    return path
