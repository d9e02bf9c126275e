"""Signal codecs and result persistence."""

from .signal_io import (
    read_dictionary,
    read_observation,
    read_signal,
    read_signals,
    read_support,
    write_dictionary,
    write_observation,
    write_prtf_csv,
    write_signal,
    write_signal_csv,
    write_signals,
    write_trace_csv,
)
from .result_store import ResultStore

__all__ = [
    'read_dictionary',
    'read_observation',
    'read_signal',
    'read_signals',
    'read_support',
    'write_dictionary',
    'write_observation',
    'write_prtf_csv',
    'write_signal',
    'write_signal_csv',
    'write_signals',
    'write_trace_csv',
    'ResultStore'
]
