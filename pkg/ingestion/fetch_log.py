import logging
import os
from typing import Dict, Iterable, List

import pandas as pd

from core.errors import TraceParseError
from core.types import FetchRecord, Itinerary

logger = logging.getLogger(__name__)

FETCH_LOG_COLUMNS = ['timestamp_s', 'hotel_id', 'checkin', 'checkout', 'adults', 'children',
                     'rooms', 'price_minor']
OPTIONAL_COLUMNS = ['available']


def read_fetch_log(path: str) -> List[FetchRecord]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Fetch log not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, compression='infer')
    except pd.errors.EmptyDataError:
        return []

    missing = [c for c in FETCH_LOG_COLUMNS if c not in df.columns]
    if missing:
        raise TraceParseError(path, 1, f"missing columns: {', '.join(missing)}")
    if 'available' not in df.columns:
        df['available'] = '1'

    interned: Dict[Itinerary, Itinerary] = {}
    records = []
    # header is line 1
    for line_number, row in enumerate(df.itertuples(index=False), start=2):
        try:
            itinerary = Itinerary.from_fields(row.hotel_id, row.checkin, row.checkout,
                                              row.adults, row.children, row.rooms)
            records.append(FetchRecord(
                itinerary=interned.setdefault(itinerary, itinerary),
                timestamp=int(row.timestamp_s),
                price=int(row.price_minor),
                available=row.available.strip().lower() in ('1', 'true', 'yes'),
            ))
        except ValueError as exc:
            raise TraceParseError(path, line_number, str(exc)) from exc

    logger.info(f"Read {len(records):,} fetch records ({len(interned):,} itineraries) from {path}")
    return records


def write_fetch_log(records: Iterable[FetchRecord], path: str) -> int:
    rows = []
    for r in records:
        fields = r.itinerary.to_fields()
        rows.append((r.timestamp, fields['hotel_id'], fields['checkin'], fields['checkout'],
                     fields['adults'], fields['children'], fields['rooms'], r.price, int(r.available)))
    df = pd.DataFrame(rows, columns=FETCH_LOG_COLUMNS + OPTIONAL_COLUMNS)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    df.to_csv(path, index=False, compression='infer', lineterminator='\n')

    logger.info(f"Wrote {len(df):,} fetch records to {path}")
    return len(df)
