import csv
import gzip
import logging
import os
from typing import BinaryIO, Dict, Iterable, Iterator

import pandas as pd

from core.errors import TraceParseError
from core.types import Itinerary, UserSearch

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['timestamp_s', 'user_id', 'hotel_id', 'checkin', 'checkout',
                 'adults', 'children', 'rooms', 'dc_id']
PROGRESS_INTERVAL = 200_000


def open_binary(path: str) -> BinaryIO:
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    if path.endswith('.gz'):
        return gzip.open(path, 'rb')
    return open(path, 'rb')


def decoded_lines(path: str, handle: BinaryIO) -> Iterator[str]:
    """UTF-8 lines of ``handle``; a line that does not decode raises TraceParseError."""
    for line_number, raw in enumerate(handle, start=1):
        try:
            yield raw.decode('utf-8')
        except UnicodeDecodeError as exc:
            raise TraceParseError(path, line_number, f"invalid UTF-8 at byte {exc.start}") from exc


def _parse_row(path: str, line_number: int, fields, interned: Dict[Itinerary, Itinerary]) -> UserSearch:
    if len(fields) != len(TRACE_COLUMNS):
        raise TraceParseError(path, line_number, f"expected {len(TRACE_COLUMNS)} fields, got {len(fields)}")
    ts, user_id, hotel_id, checkin, checkout, adults, children, rooms, dc_id = (f.strip() for f in fields)
    try:
        timestamp = int(ts)
        itinerary = Itinerary.from_fields(hotel_id, checkin, checkout, adults, children, rooms)
        dc = int(dc_id)
    except ValueError as exc:
        raise TraceParseError(path, line_number, str(exc)) from exc
    if timestamp < 0 or dc < 0:
        raise TraceParseError(path, line_number, "timestamp and dc_id must be >= 0")
    if not user_id or not hotel_id:
        raise TraceParseError(path, line_number, "user_id and hotel_id must be non-empty")
    return UserSearch(user_id, interned.setdefault(itinerary, itinerary), timestamp, dc)


def ingest_trace(path: str) -> Iterator[UserSearch]:
    """Stream searches from a trace CSV (gzip by extension, optional header line)."""
    interned: Dict[Itinerary, Itinerary] = {}
    last_timestamp = None
    count = 0

    with open_binary(path) as handle:
        for line_number, fields in enumerate(csv.reader(decoded_lines(path, handle)), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if line_number == 1 and fields[0].strip() == TRACE_COLUMNS[0]:
                continue
            search = _parse_row(path, line_number, fields, interned)
            if last_timestamp is not None and search.timestamp < last_timestamp:
                raise TraceParseError(path, line_number,
                                      f"timestamp {search.timestamp} is before previous {last_timestamp}")
            last_timestamp = search.timestamp
            count += 1
            if count % PROGRESS_INTERVAL == 0:
                logger.info(f"Read {count:,} searches from {path}")
            yield search

    logger.info(f"Finished reading {path}: {count:,} searches, {len(interned):,} itineraries")


def write_trace(searches: Iterable[UserSearch], path: str, header: bool = False) -> int:
    rows = []
    for s in searches:
        fields = s.itinerary.to_fields()
        rows.append((s.timestamp, s.user_id, fields['hotel_id'], fields['checkin'], fields['checkout'],
                     fields['adults'], fields['children'], fields['rooms'], s.dc_id))
    df = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    df.to_csv(path, index=False, header=header, compression='infer', lineterminator='\n')

    logger.info(f"Wrote {len(df):,} searches to {path}")
    return len(df)
