from .fetch_log import read_fetch_log, write_fetch_log
from .trace_reader import ingest_trace, write_trace

__all__ = ['ingest_trace', 'write_trace', 'read_fetch_log', 'write_fetch_log']
