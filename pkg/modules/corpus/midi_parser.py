"""
Standard MIDI File import and export.

Chunk framing is checked with struct first so that broken files are reported
with a byte offset; event decoding (variable-length delta times, running
status) is left to mido.
"""

import io
import logging
import os
import struct
from typing import Dict, Iterable, List, NamedTuple, Optional, Set, Tuple

import mido

from modules.corpus.corpus import Corpus, corpus_stem, report_problem
from modules.error_analytics import ErrorTracker
from modules.error_handler import (
    DuplicateIdError, MelodyParseError, StandardError, UnsupportedFormatError,
)
from modules.file_manager import atomic_write_bytes
from modules.melody import Melody, Note, enforce_monophony

general_logger = logging.getLogger('general_logger')

HEADER_MAGIC = b'MThd'
TRACK_MAGIC = b'MTrk'
CHUNK_HEADER = struct.Struct('>4sI')
HEADER_BODY = struct.Struct('>HHH')
EXPORT_VELOCITY = 64


class SmfLayout(NamedTuple):
    """Framing of a Standard MIDI File."""
    format: int
    track_count: int
    tpqn: int
    track_chunks: Tuple[bytes, ...]  # raw MTrk chunks, header included


def _parse_error(message: str, source: str, offset: Optional[int]) -> MelodyParseError:
    return MelodyParseError(message, context={"source": source, "byte_offset": offset})


def scan_chunks(data: bytes, source: str = '') -> SmfLayout:
    """
    Validate header and chunk framing.

    Non-MTrk chunks are skipped, as readers are required to do.

    Raises:
        MelodyParseError: bad magic, bad lengths or truncation (with byte offset)
        UnsupportedFormatError: SMPTE time division or format 2
    """
    if len(data) < CHUNK_HEADER.size or data[:4] != HEADER_MAGIC:
        raise _parse_error("not a Standard MIDI File (missing MThd)", source, 0)
    _, header_length = CHUNK_HEADER.unpack_from(data, 0)
    if header_length < HEADER_BODY.size:
        raise _parse_error(f"header chunk too short ({header_length} bytes)", source, 4)
    if CHUNK_HEADER.size + header_length > len(data):
        raise _parse_error("file truncated inside the header chunk", source, len(data))
    fmt, track_count, division = HEADER_BODY.unpack_from(data, CHUNK_HEADER.size)
    if division & 0x8000:
        raise UnsupportedFormatError("SMPTE time division is not supported",
                                     context={"source": source, "byte_offset": 12})
    if fmt == 2:
        raise UnsupportedFormatError("format 2 (sequential tracks) is not supported",
                                     context={"source": source, "byte_offset": 8})
    if fmt > 2:
        raise _parse_error(f"unknown SMF format {fmt}", source, 8)
    if division == 0:
        raise _parse_error("time division of 0 ticks per quarter note", source, 12)

    chunks: List[bytes] = []
    offset = CHUNK_HEADER.size + header_length
    while offset < len(data):
        if len(data) - offset < CHUNK_HEADER.size:
            raise _parse_error("file truncated inside a chunk header", source, offset)
        magic, length = CHUNK_HEADER.unpack_from(data, offset)
        end = offset + CHUNK_HEADER.size + length
        if end > len(data):
            raise _parse_error(
                f"chunk declares {length} bytes but only {len(data) - offset - CHUNK_HEADER.size} remain",
                source, offset,
            )
        if magic == TRACK_MAGIC:
            chunks.append(data[offset:end])
        offset = end
    if len(chunks) < track_count:
        raise _parse_error(f"header announces {track_count} tracks, found {len(chunks)}",
                           source, len(data))
    return SmfLayout(fmt, track_count, division, tuple(chunks[:track_count]))


def _rebuild(layout: SmfLayout) -> bytes:
    """Canonical byte stream (header + MTrk chunks only) for mido."""
    header = CHUNK_HEADER.pack(HEADER_MAGIC, HEADER_BODY.size) + \
        HEADER_BODY.pack(layout.format, layout.track_count, layout.tpqn)
    return header + b''.join(layout.track_chunks)


def _track_notes(track: mido.MidiTrack) -> Tuple[List[Note], Set[str]]:
    notes: List[Note] = []
    meters: Set[str] = set()
    sounding: Dict[int, int] = {}
    tick = 0
    for msg in track:
        tick += msg.time
        if msg.type == 'time_signature':
            meters.add(f"{msg.numerator}/{msg.denominator}")
        elif msg.type == 'note_on' and msg.velocity > 0:
            if msg.note in sounding:
                onset = sounding.pop(msg.note)
                if tick > onset:
                    notes.append(Note(onset, tick - onset, msg.note))
            sounding[msg.note] = tick
        elif msg.type in ('note_off', 'note_on') and msg.note in sounding:
            # note_on with velocity 0 closes the note like note_off
            onset = sounding.pop(msg.note)
            if tick > onset:
                notes.append(Note(onset, tick - onset, msg.note))
    for pitch, onset in sorted(sounding.items(), key=lambda item: item[1]):
        if tick > onset:
            notes.append(Note(onset, tick - onset, pitch))
    notes.sort(key=lambda n: n.onset)
    return notes, meters


def parse_midi_bytes(data: bytes, melody_id: str, source: str = '') -> List[Melody]:
    """
    Decode an SMF byte stream into one melody per track that has notes.

    Overlapping notes are truncated to keep each melody monophonic.
    """
    layout = scan_chunks(data, source)
    try:
        midi = mido.MidiFile(file=io.BytesIO(_rebuild(layout)))
    except (EOFError, OSError, ValueError, KeyError, IndexError) as e:
        raise MelodyParseError(f"invalid track data: {e}", context={"source": source},
                               original_exception=e)

    tracks: List[List[Note]] = []
    meters: Set[str] = set()
    for track in midi.tracks:
        notes, track_meters = _track_notes(track)
        meters |= track_meters
        tracks.append(notes)
    meter = None if not meters else (meters.pop() if len(meters) == 1 else 'mixed')

    with_notes = [(i, notes) for i, notes in enumerate(tracks) if notes]
    melodies = []
    for i, notes in with_notes:
        track_id = melody_id if len(with_notes) == 1 else f"{melody_id}-t{i}"
        melody = Melody(id=track_id, tpqn=layout.tpqn, notes=notes, meter=meter)
        melodies.append(enforce_monophony(melody))
    return melodies


def import_midi(path: str) -> Corpus:
    """
    Read one Standard MIDI File (format 0 or 1).

    Raises:
        MelodyParseError: malformed file, nothing is returned
        UnsupportedFormatError: SMPTE division or format 2
    """
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise MelodyParseError(f"cannot read {path}: {e.strerror}", context={"source": path},
                               original_exception=e)
    melodies = parse_midi_bytes(data, corpus_stem(path), path)
    general_logger.info(f"Imported {len(melodies)} melodies from {path}")
    return Corpus(tuple(melodies), path)


def import_midi_paths(paths: Iterable[str], tracker: Optional[ErrorTracker] = None,
                      strict: bool = False) -> Corpus:
    """
    Import several files; a failing file is reported and skipped.

    Args:
        paths: MIDI files
        tracker: Diagnostics sink (global tracker by default)
        strict: Raise instead of skipping

    Returns:
        Corpus: Melodies of all readable files, in path order
    """
    melodies: List[Melody] = []
    seen: Set[str] = set()
    paths = list(paths)
    for path in paths:
        try:
            corpus = import_midi(path)
        except StandardError as e:
            report_problem(e, tracker, strict)
            continue
        for melody in corpus:
            if melody.id in seen:
                report_problem(DuplicateIdError(f"duplicate melody id '{melody.id}'",
                                                context={"source": path, "id": melody.id}),
                               tracker, strict)
                continue
            seen.add(melody.id)
            melodies.append(melody)
    general_logger.info(f"Imported {len(melodies)} melodies from {len(paths)} MIDI files")
    return Corpus(tuple(melodies), f"{len(paths)} MIDI files")


def _meter_message(meter: Optional[str]) -> Optional[mido.MetaMessage]:
    numerator, denominator = 4, 4
    if meter is not None:
        try:
            numerator, denominator = (int(part) for part in meter.split('/'))
        except ValueError:
            return None
        if numerator <= 0 or denominator <= 0 or denominator & (denominator - 1):
            return None
    return mido.MetaMessage('time_signature', numerator=numerator, denominator=denominator, time=0)


def midi_bytes(melody: Melody) -> bytes:
    """Single-track (format 0) SMF rendering of a melody."""
    midi = mido.MidiFile(type=0, ticks_per_beat=melody.tpqn)
    track = mido.MidiTrack()
    midi.tracks.append(track)
    meter = _meter_message(melody.meter)
    if meter is not None:
        track.append(meter)

    clock = 0
    for note in melody.notes:
        track.append(mido.Message('note_on', note=note.pitch, velocity=EXPORT_VELOCITY,
                                  time=note.onset - clock))
        track.append(mido.Message('note_off', note=note.pitch, velocity=0, time=note.duration))
        clock = note.onset + note.duration
    track.append(mido.MetaMessage('end_of_track', time=0))

    buffer = io.BytesIO()
    midi.save(file=buffer)
    return buffer.getvalue()


def export_midi(melody: Melody, path: str) -> None:
    """Atomically write a melody as a format 0 Standard MIDI File."""
    atomic_write_bytes(path, midi_bytes(melody))
    general_logger.debug(f"Exported {melody.id} to {path}")


def export_midi_dir(melodies: Iterable[Melody], directory: str) -> List[str]:
    paths = []
    for melody in melodies:
        path = os.path.join(directory, f"{melody.id}.mid")
        export_midi(melody, path)
        paths.append(path)
    general_logger.info(f"Exported {len(paths)} MIDI files to {directory}")
    return paths
