import itertools
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import SimulationConfig
from core.errors import ScheduleCapacityError, TraceParseError
from core.types import Itinerary
from scheduler.planning import ItineraryPlanEntry

logger = logging.getLogger(__name__)

PLAN_COLUMNS = ['second', 'hotel_id', 'checkin', 'checkout', 'adults', 'children', 'rooms']


@dataclass
class SchedulePlan:
    """One day of planned fetches: ``buckets[s]`` is what to send at second ``s`` of the day."""

    buckets: List[List[Itinerary]]
    capacity: np.ndarray
    mu: int
    entries: List[ItineraryPlanEntry] = field(default_factory=list)

    @property
    def day(self) -> int:
        return len(self.buckets)

    @property
    def budget(self) -> int:
        return self.mu * self.day

    @property
    def total_sends(self) -> int:
        return sum(len(b) for b in self.buckets)

    def loads(self) -> np.ndarray:
        return np.array([len(b) for b in self.buckets], dtype=np.int64)

    def sends_at(self, second: int) -> List[Itinerary]:
        return self.buckets[second % self.day]

    def send_times(self) -> Dict[Itinerary, List[int]]:
        times: Dict[Itinerary, List[int]] = defaultdict(list)
        for second, bucket in enumerate(self.buckets):
            for itinerary in bucket:
                times[itinerary].append(second)
        return dict(times)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for second, bucket in enumerate(self.buckets):
            for itinerary in bucket:
                f = itinerary.to_fields()
                rows.append((second, f['hotel_id'], f['checkin'], f['checkout'],
                             f['adults'], f['children'], f['rooms']))
        return pd.DataFrame(rows, columns=PLAN_COLUMNS)

    def write_csv(self, path: str):
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        df = self.to_frame()
        df.to_csv(path, index=False, lineterminator='\n')
        logger.info(f"Wrote plan with {len(df):,} sends to {path}")


def read_plan_csv(path: str, mu: int, ttl_of: Callable[[Itinerary], int],
                  day: int = SimulationConfig.SECONDS_PER_DAY) -> SchedulePlan:
    """Load a plan CSV for auditing; entries are rebuilt from ``ttl_of``."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Plan not found: {path}")
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in PLAN_COLUMNS if c not in df.columns]
    if missing:
        raise TraceParseError(path, 1, f"missing columns: {', '.join(missing)}")

    buckets: List[List[Itinerary]] = [[] for _ in range(day)]
    interned: Dict[Itinerary, Itinerary] = {}
    for line_number, r in enumerate(df.itertuples(index=False), start=2):
        try:
            second = int(r.second)
            if not 0 <= second < day:
                raise ValueError(f"second {second} outside 0..{day - 1}")
            itinerary = Itinerary.from_fields(r.hotel_id, r.checkin, r.checkout, r.adults, r.children, r.rooms)
        except ValueError as exc:
            raise TraceParseError(path, line_number, str(exc)) from exc
        buckets[second].append(interned.setdefault(itinerary, itinerary))

    entries = [ItineraryPlanEntry.for_ttl(it, ttl_of(it), 0.0) for it in interned]
    logger.info(f"Read plan with {len(df):,} sends for {len(entries):,} itineraries from {path}")
    return SchedulePlan(buckets, np.full(day, mu, dtype=np.int64), mu, entries)


def send_pattern(frequency: int, day: int = SimulationConfig.SECONDS_PER_DAY) -> np.ndarray:
    """Offsets of ``frequency`` evenly spread sends; gaps are floor or ceil of day/frequency."""
    return np.array([j * day // frequency for j in range(frequency)], dtype=np.int64)


def _find_offset(load: np.ndarray, capacity: np.ndarray, pattern: np.ndarray, preferred: int,
                 period: int, latest: Optional[int] = None) -> Optional[int]:
    """First offset, starting from ``preferred``, where every send of ``pattern`` fits.

    With ``latest`` only offsets up to it are tried (forward from ``preferred``, then back
    toward 0) and None means none of them fits.
    """
    day = len(load)
    if latest is not None:
        latest = min(latest, period - 1)
        preferred = min(preferred, latest)
        candidates = itertools.chain(range(preferred, latest + 1), range(preferred - 1, -1, -1))
    else:
        candidates = ((preferred + shift) % day for shift in range(period))
    for offset in candidates:
        seconds = (offset + pattern) % day
        if (load[seconds] < capacity[seconds]).all():
            return offset
    if latest is not None:
        return None
    # nothing free near the preferred slot: scan every offset of the day at once
    free = np.ones(day, dtype=bool)
    offsets = np.arange(day)
    for p in pattern:
        seconds = (offsets + p) % day
        free &= load[seconds] < capacity[seconds]
    candidates = np.flatnonzero(free)
    if len(candidates) == 0:
        return None
    after = candidates[candidates >= preferred]
    return int(after[0]) if len(after) else int(candidates[0])


def build_schedule(selected: Sequence[ItineraryPlanEntry], mu: int,
                   capacity: Optional[Sequence[int]] = None,
                   day: int = SimulationConfig.SECONDS_PER_DAY,
                   deadlines: Optional[Mapping[Itinerary, int]] = None,
                   previous: Optional[Mapping[Itinerary, int]] = None) -> SchedulePlan:
    """Spread the selected itineraries' sends over the day at a constant rate.

    Entries are grouped by (frequency, ttl). Inside a group of size k the i-th itinerary
    starts at floor(i * P / k), P = ceil(day / f), and repeats every day / f seconds, so
    the group load is even over each period and consecutive sends are never more than
    ceil(day / f) <= ttl apart, wrap-around included. When a second is already full the
    itinerary moves to the next offset where all its sends fit.

    ``previous`` maps itineraries to their first send in the previous day's plan; they
    start from the same offset within their period, so unchanged entries repeat
    yesterday's seconds. ``deadlines`` maps itineraries to the second of the day by which
    their first send is due, usually when the quote carried over from the previous day
    expires. Such an itinerary starts no later than that second whenever a free offset
    allows it.

    ``capacity`` optionally lowers the per-second limit below ``mu`` (to reserve
    passive budget). Raises ScheduleCapacityError naming the first full second when an
    itinerary cannot be placed anywhere.
    """
    if mu <= 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    cap = np.full(day, mu, dtype=np.int64) if capacity is None else np.asarray(capacity, dtype=np.int64)
    if len(cap) != day:
        raise ValueError(f"capacity must have {day} entries, got {len(cap)}")
    cap = np.minimum(cap, mu)
    demand = sum(e.frequency for e in selected)
    if demand > int(cap.sum()):
        raise ValueError(f"Selected itineraries need {demand:,} sends, the day holds {int(cap.sum()):,}")
    deadlines = deadlines or {}
    previous = previous or {}

    groups: Dict[Tuple[int, int], List[ItineraryPlanEntry]] = defaultdict(list)
    for entry in selected:
        groups[(entry.frequency, entry.ttl)].append(entry)

    load = np.zeros(day, dtype=np.int64)
    buckets: List[List[Itinerary]] = [[] for _ in range(day)]
    moved = late = 0
    for (frequency, ttl) in sorted(groups, reverse=True):
        group = groups[(frequency, ttl)]
        pattern = send_pattern(frequency, day)
        period = -(-day // frequency)
        k = len(group)
        for i, entry in enumerate(group):
            first = previous.get(entry.itinerary)
            preferred = first % period if first is not None else i * period // k
            offset = None
            deadline = deadlines.get(entry.itinerary)
            if deadline is not None and deadline < period - 1:
                deadline = max(deadline, 0)
                preferred = min(preferred, deadline)
                offset = _find_offset(load, cap, pattern, preferred, period, latest=deadline)
                if offset is None:
                    late += 1
            if offset is None:
                offset = _find_offset(load, cap, pattern, preferred, period)
            if offset is None:
                seconds = (preferred + pattern) % day
                full = seconds[load[seconds] >= cap[seconds]]
                second = int(full[0]) if len(full) else int(seconds[0])
                raise ScheduleCapacityError(second, int(load[second]) + 1, int(cap[second]),
                                            entry.itinerary.key())
            if offset != preferred:
                moved += 1
            seconds = (offset + pattern) % day
            load[seconds] += 1
            for s in seconds.tolist():
                buckets[s].append(entry.itinerary)

    logger.info(f"Scheduled {len(selected):,} itineraries in {len(groups)} group(s): "
                f"{int(load.sum()):,} sends, peak {int(load.max()) if day else 0}/s, {moved:,} moved off their slot")
    if late:
        logger.warning(f"{late:,} itinerary(ies) start after their carried-over quote expires")
    return SchedulePlan(buckets, cap, mu, list(selected))
