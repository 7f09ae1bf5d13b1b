import heapq
import itertools
import logging
import os
from collections import OrderedDict
from typing import Dict, List, Optional

import pandas as pd

from core.types import Itinerary, PriceQuote, UserSearch

logger = logging.getLogger(__name__)

# expiry of an entry whose price was never fetched; sorts before every real expiry
NEVER_FETCHED = -1


class _Entry:
    __slots__ = ('fetched_at', 'ttl', 'expires_at', 'last_used')

    def __init__(self, last_used: int):
        self.fetched_at: Optional[int] = None
        self.ttl: Optional[int] = None
        self.expires_at = NEVER_FETCHED
        self.last_used = last_used


class LruSearchCache:
    """Auxiliary LRU cache of searched itineraries with their last known quote metadata.

    Every search is admitted; when the cache is over capacity the least recently used
    itinerary is evicted. ``pull_expiring`` serves the aggressive refresher: entries
    ordered by expiry, ties broken toward the most recently used.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"LRU capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._entries: "OrderedDict[Itinerary, _Entry]" = OrderedDict()
        self._heap: list = []
        self._clock = 0
        self._counter = itertools.count()
        self.evictions = 0

    def __len__(self):
        return len(self._entries)

    def __contains__(self, itinerary: Itinerary) -> bool:
        return itinerary in self._entries

    def _push(self, itinerary: Itinerary, entry: _Entry):
        heapq.heappush(self._heap, (entry.expires_at, -entry.last_used, next(self._counter), itinerary))
        if len(self._heap) > 4 * len(self._entries) + 1024:
            self._compact()

    def _compact(self):
        self._heap = [(e.expires_at, -e.last_used, next(self._counter), it) for it, e in self._entries.items()]
        heapq.heapify(self._heap)

    def _is_current(self, item) -> bool:
        expires_at, neg_used, _, itinerary = item
        entry = self._entries.get(itinerary)
        return entry is not None and entry.expires_at == expires_at and entry.last_used == -neg_used

    @staticmethod
    def _apply_quote(entry: _Entry, quote: PriceQuote):
        entry.fetched_at = quote.fetched_at
        entry.ttl = quote.ttl
        entry.expires_at = quote.fetched_at + quote.ttl

    def admit(self, search: UserSearch, quote: Optional[PriceQuote] = None) -> Optional[Itinerary]:
        """Make the search's itinerary most recent; returns the evicted itinerary, if any."""
        self._clock += 1
        itinerary = search.itinerary
        entry = self._entries.get(itinerary)
        evicted = None
        if entry is None:
            entry = _Entry(self._clock)
            self._entries[itinerary] = entry
            if len(self._entries) > self.capacity:
                evicted, _ = self._entries.popitem(last=False)
                self.evictions += 1
        else:
            entry.last_used = self._clock
            self._entries.move_to_end(itinerary)
        if quote is not None and quote.ttl is not None:
            self._apply_quote(entry, quote)
        self._push(itinerary, entry)
        return evicted

    def record_fetch(self, quote: PriceQuote):
        """Refresh quote metadata of a cached itinerary without changing its recency."""
        entry = self._entries.get(quote.itinerary)
        if entry is None or quote.ttl is None:
            return
        if entry.expires_at == quote.fetched_at + quote.ttl:
            return
        self._apply_quote(entry, quote)
        self._push(quote.itinerary, entry)

    def pull_expiring(self, now: int, k: int) -> List[Itinerary]:
        """Up to ``k`` distinct itineraries, expired first, then soonest to expire after ``now``."""
        if k < 0:
            raise ValueError(f"k must be >= 0, got {k}")
        pulled, kept, seen = [], [], set()
        while self._heap and len(pulled) < k:
            item = heapq.heappop(self._heap)
            itinerary = item[3]
            if itinerary in seen or not self._is_current(item):
                continue
            seen.add(itinerary)
            pulled.append(itinerary)
            kept.append(item)
        for item in kept:
            heapq.heappush(self._heap, item)
        return pulled

    def expires_at(self, itinerary: Itinerary) -> Optional[int]:
        entry = self._entries.get(itinerary)
        return None if entry is None else entry.expires_at

    def contents(self) -> List[Itinerary]:
        """Itineraries from least to most recently used."""
        return list(self._entries.keys())

    def dump_csv(self, path: str):
        rows = [(it.key(), e.fetched_at, e.ttl) for it, e in self._entries.items()]
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        pd.DataFrame(rows, columns=['itinerary', 'fetched_at', 'ttl']).to_csv(path, index=False, lineterminator='\n')

    def get_stats(self) -> Dict:
        return {
            "size": len(self._entries),
            "capacity": self.capacity,
            "evictions": self.evictions,
            "heap_size": len(self._heap),
        }
