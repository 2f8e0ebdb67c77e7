"""Corpus ingestion, filtering, splitting, augmentation and token files."""

from modules.corpus.corpus import (
    Corpus, SplitSpec, augment_epoch, filter_four_four, filter_min_notes,
    load_melodies, save_melodies, split,
)
from modules.corpus.midi_parser import export_midi, import_midi, import_midi_paths
from modules.corpus.token_files import (
    encode_corpus, load_token_file, truncate_tokens, write_id_file, write_token_file,
)

__all__ = [
    'Corpus', 'SplitSpec', 'augment_epoch', 'filter_four_four', 'filter_min_notes',
    'load_melodies', 'save_melodies', 'split',
    'export_midi', 'import_midi', 'import_midi_paths',
    'encode_corpus', 'load_token_file', 'truncate_tokens', 'write_id_file', 'write_token_file',
]
