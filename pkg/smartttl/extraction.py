import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

from config.settings import TTLConfig
from core.types import FetchRecord, Itinerary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class DurationSample:
    """How long a price was seen to hold, measured between two consecutive fetches.

    ``observed_at`` and ``available`` describe the earlier fetch, the one whose price the
    duration belongs to. ``censored`` samples are lower bounds (no change was seen).
    """

    itinerary: Itinerary
    duration: int
    observed_at: int
    available: bool = True
    censored: bool = False

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


def extract_durations(fetch_log: Iterable[FetchRecord],
                      emit_censored: bool = TTLConfig.EMIT_CENSORED) -> List[DurationSample]:
    """One sample per observed change of (price, availability) between consecutive fetches.

    The first fetch of an itinerary and repeats of an unchanged price emit nothing, unless
    ``emit_censored`` is set, in which case unchanged pairs emit censored samples.
    Raises ValueError when an itinerary's fetches are not in time order.
    """
    last: Dict[Itinerary, Tuple[int, int, bool]] = {}
    samples: List[DurationSample] = []
    changes = censored = 0

    for record in fetch_log:
        previous = last.get(record.itinerary)
        last[record.itinerary] = (record.timestamp, record.price, record.available)
        if previous is None:
            continue
        prev_time, prev_price, prev_available = previous
        gap = record.timestamp - prev_time
        changed = (record.price, record.available) != (prev_price, prev_available)
        if gap < 0:
            raise ValueError(f"Fetch log is not time-ordered for {record.itinerary.key()}: "
                             f"{record.timestamp} after {prev_time}")
        if gap == 0:
            if changed:
                raise ValueError(f"Conflicting prices for {record.itinerary.key()} at {record.timestamp}")
            continue
        if changed:
            samples.append(DurationSample(record.itinerary, gap, prev_time, prev_available))
            changes += 1
        elif emit_censored:
            samples.append(DurationSample(record.itinerary, gap, prev_time, prev_available, censored=True))
            censored += 1

    logger.info(f"Extracted {changes:,} price durations ({censored:,} censored) "
                f"from {len(last):,} itineraries")
    return samples
