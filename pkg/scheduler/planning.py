import bisect
import heapq
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Tuple

from config.settings import SchedulerConfig, SimulationConfig
from core.types import Itinerary, validate_probability

logger = logging.getLogger(__name__)

ADMISSION_MODES = ('atomic', 'stop', 'partial')


def itinerary_frequency(ttl: int) -> int:
    """Fetches per day that keep a quote with this TTL live around the clock: ceil(86400 / ttl)."""
    if ttl is None or ttl <= 0:
        raise ValueError(f"ttl must be > 0, got {ttl}")
    return -(-SimulationConfig.SECONDS_PER_DAY // int(ttl))


def itinerary_value(searches_on_itinerary: Iterable[Tuple[float, float]]) -> float:
    """Expected bookings of an always-cached itinerary: sum of p_b * p_a over its searches."""
    terms = []
    for p_b, p_a in searches_on_itinerary:
        validate_probability(p_b, "p_b")
        validate_probability(p_a, "p_a")
        terms.append(p_b * p_a)
    return math.fsum(terms)


@dataclass(frozen=True)
class ItineraryPlanEntry:
    itinerary: Itinerary
    ttl: int
    frequency: int
    value: float
    partial: bool = False

    def __post_init__(self):
        if self.ttl <= 0:
            raise ValueError(f"ttl must be > 0, got {self.ttl}")
        if self.frequency < 1:
            raise ValueError(f"frequency must be >= 1, got {self.frequency}")
        if not self.partial and self.frequency != itinerary_frequency(self.ttl):
            raise ValueError(f"frequency {self.frequency} does not match ttl {self.ttl}")
        if self.value < 0:
            raise ValueError(f"value must be >= 0, got {self.value}")

    @classmethod
    def for_ttl(cls, itinerary: Itinerary, ttl: int, value: float) -> "ItineraryPlanEntry":
        return cls(itinerary, int(ttl), itinerary_frequency(ttl), float(value))

    @property
    def value_per_request(self) -> float:
        return self.value / self.frequency

    @property
    def max_gap(self) -> int:
        """Longest allowed distance between consecutive sends."""
        if self.partial:
            return -(-SimulationConfig.SECONDS_PER_DAY // self.frequency)
        return self.ttl


def build_plan_entries(itineraries: Iterable[Itinerary], ttl_lookup: Callable[[Itinerary], int],
                       values: Mapping[Itinerary, float]) -> List[ItineraryPlanEntry]:
    return [ItineraryPlanEntry.for_ttl(it, ttl_lookup(it), values.get(it, 0.0)) for it in itineraries]


def select_top_requests(entries: Sequence[ItineraryPlanEntry], budget: int,
                        admission: str = SchedulerConfig.ADMISSION) -> List[ItineraryPlanEntry]:
    """Greedy by value per request under a daily budget of ``budget`` fetches.

    Itineraries are admitted whole. With ``admission='stop'`` selection ends at the first
    itinerary that does not fit in the remaining budget. The default ``'atomic'`` skips it
    and keeps admitting smaller ones further down the order. With ``admission='partial'``
    the first itinerary that does not fit takes the remaining budget at a reduced
    frequency and selection stops. Ties go to the higher total value, then to input
    order. Zero-value itineraries sort last and still take whatever budget is left.
    """
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    if admission not in ADMISSION_MODES:
        raise ValueError(f"admission '{admission}' is not valid. Options: {list(ADMISSION_MODES)}")

    order = sorted(range(len(entries)),
                   key=lambda i: (-entries[i].value_per_request, -entries[i].value, i))
    remaining = budget
    selected: List[ItineraryPlanEntry] = []
    for i in order:
        entry = entries[i]
        if remaining == 0:
            break
        if entry.frequency <= remaining:
            selected.append(entry)
            remaining -= entry.frequency
        elif admission == 'stop':
            break
        elif admission == 'partial':
            selected.append(ItineraryPlanEntry(entry.itinerary, entry.ttl, remaining,
                                               entry.value_per_request * remaining, partial=True))
            remaining = 0
            break

    logger.info(f"Selected {len(selected):,} of {len(entries):,} itineraries, "
                f"{budget - remaining:,}/{budget:,} daily fetches ({admission} admission)")
    return selected


def refresh_gain(entry: ItineraryPlanEntry, accuracy: float, current: int, frequency: int) -> float:
    """Expected bookings per day gained per extra send when ``entry`` goes from ``current``
    to ``frequency`` sends a day.

    Accuracy is taken to fall linearly with quote age, at the rate that brings it down to
    ``accuracy`` after ``entry.ttl`` seconds. Moving from f to f' sends a day shortens the
    refresh period by day * (f' - f) / (f * f'), so the gain per send is
    value / accuracy * (1 - accuracy) / ttl * day / (f * f').
    """
    validate_probability(accuracy, "accuracy")
    if accuracy == 0.0 or accuracy == 1.0 or entry.value == 0.0:
        return 0.0
    staleness = (1.0 - accuracy) / entry.ttl
    day = SimulationConfig.SECONDS_PER_DAY
    return entry.value / accuracy * staleness * day / (current * frequency)


def allocate_surplus(selected: Sequence[ItineraryPlanEntry], budget: int,
                     accuracy_of: Mapping[Itinerary, float],
                     frequencies: Sequence[int] = SchedulerConfig.REFRESH_FREQUENCIES) -> List[ItineraryPlanEntry]:
    """Spend the budget the selection left over on refreshing itineraries more often.

    Each step moves one itinerary to the next frequency of ``frequencies`` (counts that
    divide the day and each other, so upgraded sends pack without gaps), always picking the step with
    the largest ``refresh_gain``; a step that no longer fits drops that itinerary from
    further upgrades. Upgraded entries get ttl = day / frequency, the refresh period the
    plan guarantees; the stored quotes keep their own TTL. Returns the entries in input order.
    """
    day = SimulationConfig.SECONDS_PER_DAY
    ladder = sorted(set(int(f) for f in frequencies))
    if any(f < 1 or day % f for f in ladder):
        raise ValueError(f"refresh frequencies must divide {day}: {ladder}")
    remaining = budget - sum(e.frequency for e in selected)
    result = list(selected)
    if remaining <= 0 or not ladder:
        return result

    def next_step(i: int) -> Optional[Tuple[float, int, int]]:
        original = selected[i]
        if original.partial:
            return None
        current = result[i].frequency
        k = bisect.bisect_right(ladder, current)
        if k == len(ladder):
            return None
        gain = refresh_gain(original, accuracy_of.get(original.itinerary, 1.0), current, ladder[k])
        return (-gain, i, ladder[k]) if gain > 0 else None

    heap = [step for step in (next_step(i) for i in range(len(result))) if step is not None]
    heapq.heapify(heap)
    upgrades = 0
    while heap and remaining > 0:
        _, i, frequency = heapq.heappop(heap)
        current = result[i]
        cost = frequency - current.frequency
        if cost > remaining:
            continue
        result[i] = ItineraryPlanEntry(current.itinerary, day // frequency, frequency, current.value)
        remaining -= cost
        upgrades += 1
        step = next_step(i)
        if step is not None:
            heapq.heappush(heap, step)

    logger.info(f"Surplus refreshes: {upgrades:,} upgrade step(s), {remaining:,} daily fetches left idle")
    return result
