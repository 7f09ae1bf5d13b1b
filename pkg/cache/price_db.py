import logging
import os
from typing import Dict, Optional

import pandas as pd

from core.types import Itinerary, PriceQuote

logger = logging.getLogger(__name__)

DUMP_COLUMNS = ['itinerary', 'fetched_at', 'ttl', 'price']


class PriceDB:
    """TTL-expiring quote store, one quote per itinerary; only TTL evicts."""

    def __init__(self):
        self._quotes: Dict[Itinerary, PriceQuote] = {}
        self.records_written = 0
        self.lookups = 0
        self.hits = 0

    def __len__(self):
        return len(self._quotes)

    def get(self, itinerary: Itinerary, now: int) -> Optional[PriceQuote]:
        self.lookups += 1
        quote = self._quotes.get(itinerary)
        if quote is None or not (quote.fetched_at <= now < quote.fetched_at + quote.ttl):
            return None
        self.hits += 1
        return quote

    def peek(self, itinerary: Itinerary) -> Optional[PriceQuote]:
        """Latest stored quote regardless of expiry."""
        return self._quotes.get(itinerary)

    def put(self, quote: PriceQuote):
        if quote.ttl is None or quote.ttl <= 0:
            raise ValueError(f"Cannot store a quote without a positive ttl (got {quote.ttl}) "
                             f"for {quote.itinerary.key()}")
        self._quotes[quote.itinerary] = quote
        self.records_written += 1

    def live_count(self, now: int) -> int:
        return sum(1 for q in self._quotes.values() if q.is_live(now))

    def dump_csv(self, path: str):
        rows = [(q.itinerary.key(), q.fetched_at, q.ttl, q.price) for q in self._quotes.values()]
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        pd.DataFrame(rows, columns=DUMP_COLUMNS).to_csv(path, index=False, lineterminator='\n')
        logger.info(f"Dumped {len(rows):,} quotes to {path}")

    def get_stats(self) -> Dict:
        return {
            "entries": len(self._quotes),
            "records_written": self.records_written,
            "lookups": self.lookups,
            "hits": self.hits,
        }
