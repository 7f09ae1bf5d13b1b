import logging
from dataclasses import dataclass
from datetime import date
from typing import Dict, Iterable, List, Optional

from config.settings import TTLConfig
from core.types import Itinerary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True, slots=True)
class ClusterKey:
    checkin_lead: int
    available: bool = True

    def __post_init__(self):
        if self.checkin_lead < 0:
            raise ValueError(f"checkin_lead must be >= 0, got {self.checkin_lead}")


def lead_key(itinerary: Itinerary, search_time: int, lead_cap: int = TTLConfig.LEAD_CAP_DAYS,
             start_date: Optional[date] = None) -> int:
    lead = itinerary.lead_days(search_time, start_date)
    if lead < 0:
        raise ValueError(f"Check-in {itinerary.criteria.checkin} of {itinerary.key()} "
                         f"is before the search date (t={search_time})")
    return min(lead, lead_cap)


def cluster(itinerary: Itinerary, search_time: int, available: bool = True,
            lead_cap: int = TTLConfig.LEAD_CAP_DAYS, start_date: Optional[date] = None) -> ClusterKey:
    """Cluster of a request: whole days to check-in (clamped to ``lead_cap``) and sold-out flag."""
    return ClusterKey(lead_key(itinerary, search_time, lead_cap, start_date), available)


def gap_samples(events: Iterable, lead_cap: int = TTLConfig.LEAD_CAP_DAYS,
                start_date: Optional[date] = None) -> Dict[int, List[int]]:
    """Inter-arrival gaps of same-itinerary events, pooled by check-in lead.

    ``events`` are time-ordered objects with ``itinerary`` and ``timestamp`` (searches or
    fetch records). A gap is filed under the lead of the later event, the one a cached
    quote would serve.
    """
    last_seen: Dict[Itinerary, int] = {}
    pooled: Dict[int, List[int]] = {}
    skipped = 0
    for event in events:
        previous = last_seen.get(event.itinerary)
        last_seen[event.itinerary] = event.timestamp
        if previous is None:
            continue
        gap = event.timestamp - previous
        if gap < 0:
            raise ValueError(f"Events are not time-ordered for {event.itinerary.key()}: "
                             f"{event.timestamp} after {previous}")
        try:
            lead = lead_key(event.itinerary, event.timestamp, lead_cap, start_date)
        except ValueError:
            skipped += 1
            continue
        pooled.setdefault(lead, []).append(gap)

    if skipped:
        logger.warning(f"Skipped {skipped:,} gaps of searches after their check-in date")
    logger.debug(f"Pooled gaps for {len(pooled)} lead days from {len(last_seen):,} itineraries")
    return pooled
