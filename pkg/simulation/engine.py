import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from cache.lru_cache import LruSearchCache
from cache.price_db import PriceDB
from config.settings import SimulationConfig
from core.errors import ConfigError, ScheduleCapacityError
from core.types import FetchRecord, Itinerary, PriceQuote, UserSearch, stable_hash
from scheduler.audit import audit_plan
from scheduler.lru_refresher import lru_refresh_batch
from scheduler.planning import allocate_surplus, build_plan_entries, select_top_requests
from scheduler.schedule import SchedulePlan, build_schedule
from scheduler.value_table import ValueTable
from simulation.metrics import DayMetrics, Metrics
from simulation.policies import AGGRESSIVE_LRU, AGGRESSIVE_SMART_SCHEDULER, PolicySpec
from simulators.booking_model import BookingModel
from simulators.price_process import PriceProcess
from smartttl.clustering import cluster
from smartttl.ttl_table import TtlTable
from supplier.supplier import Supplier, SupplierConfig

logger = logging.getLogger(__name__)

DAY = SimulationConfig.SECONDS_PER_DAY


class BookingDraws:
    """One uniform per trace search, in trace order, from a dedicated stream.

    Every search consumes a draw whether or not the run serves it, so runs that see
    different subsets of a trace still give each search the same draw.
    """

    BLOCK = 4096

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(stable_hash('bookings', seed))
        self._buffer: List[float] = []
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buffer):
            self._buffer = self._rng.random(self.BLOCK).tolist()
            self._pos = 0
        u = self._buffer[self._pos]
        self._pos += 1
        return u


@dataclass
class Observations:
    """What a replay saw: its fetch log and per-itinerary served and attempt counts."""

    fetch_log: List[FetchRecord] = field(default_factory=list)
    searches: Counter = field(default_factory=Counter)
    served: Counter = field(default_factory=Counter)
    attempts: Counter = field(default_factory=Counter)
    served_by_cluster: Counter = field(default_factory=Counter)
    attempts_by_cluster: Counter = field(default_factory=Counter)
    last_cluster: dict = field(default_factory=dict)
    horizon: int = 0


def first_occurrence_fraction(trace: Iterable[UserSearch]) -> float:
    """Share of searches that are the first for their itinerary; no passive cache can hit them."""
    seen = set()
    first = total = 0
    for search in trace:
        total += 1
        if search.itinerary not in seen:
            seen.add(search.itinerary)
            first += 1
    return first / total if total else 0.0


class SimulationEngine:

    # shares of the surplus target tried in turn when the upgraded plan does not fit
    SURPLUS_RETRY_SCALES = (1.0, 0.75, 0.5)

    def __init__(self, supplier_config: SupplierConfig, policy: PolicySpec, price_process: PriceProcess,
                 seed: int, booking_model: Optional[BookingModel] = None,
                 ttl_table: Optional[TtlTable] = None, value_table: Optional[ValueTable] = None,
                 horizon: Optional[int] = None, arm: Optional[str] = None,
                 user_filter: Optional[Callable[[UserSearch], bool]] = None,
                 record_observations: bool = False, record_utilization: bool = False,
                 price_tolerance: float = SimulationConfig.PRICE_TOLERANCE):
        if policy.uses_smart_ttl and ttl_table is None:
            raise ConfigError(f"Policy {policy.to_text()} needs a TTL table")
        if policy.variant == AGGRESSIVE_SMART_SCHEDULER and value_table is None:
            raise ConfigError(f"Policy {policy.to_text()} needs a value table")
        if price_tolerance < 0:
            raise ConfigError(f"price tolerance must be >= 0, got {price_tolerance}")

        self.policy = policy
        self.prices = price_process
        self.supplier = Supplier(supplier_config, price_process)
        self.booking_model = booking_model or BookingModel(seed=seed)
        self.ttl_table = ttl_table
        self.value_table = value_table
        self.horizon = horizon or price_process.horizon
        self.arm = arm or policy.to_text()
        self.user_filter = user_filter
        self.price_tolerance = price_tolerance
        self.record_utilization = record_utilization
        self.start_date = price_process.config.start_date

        self.db = PriceDB()
        self.lru = LruSearchCache(policy.capacity) if policy.variant == AGGRESSIVE_LRU else None
        self.draws = BookingDraws(seed)
        self.metrics = Metrics.empty(self.arm, math.ceil(self.horizon / DAY))
        self.observations = Observations(horizon=self.horizon) if record_observations else None
        self._next_dc = 0
        self._plan: Optional[SchedulePlan] = None

        logger.info(f"Engine configured - arm {self.arm}, policy {policy.to_text()}, "
                    f"mu {supplier_config.qps_limit}/s, horizon {self.horizon:,} s")

    def _day(self, now: int) -> DayMetrics:
        return self.metrics.days[now // DAY]

    def _ttl(self, quote: PriceQuote) -> int:
        if self.policy.ttl is not None:
            return self.policy.ttl
        return self.ttl_table.ttl_for(quote.itinerary, quote.fetched_at, quote.available)

    def _fetch(self, itinerary: Itinerary, dc_id: int, now: int) -> Optional[PriceQuote]:
        quote = self.supplier.fetch(itinerary, dc_id, now)
        day = self._day(now)
        if quote is None:
            day.rejected += 1
            return None
        stored = quote.with_ttl(self._ttl(quote))
        self.db.put(stored)
        day.fetches += 1
        if self.observations is not None:
            self.observations.fetch_log.append(FetchRecord(itinerary, now, quote.price, quote.available))
        return stored

    def _fetch_any_dc(self, itinerary: Itinerary, now: int) -> Optional[PriceQuote]:
        n = self.supplier.config.n_datacentres
        for i in range(n):
            dc = (self._next_dc + i) % n
            if self.supplier.remaining(dc, now) > 0:
                self._next_dc = (dc + 1) % n
                return self._fetch(itinerary, dc, now)
        return self._fetch(itinerary, self._next_dc, now)

    def _plan_day(self, day_start: int) -> Optional[SchedulePlan]:
        mu = self.supplier.config.effective_qps
        per_second = mu - math.ceil(self.policy.reserve_passive_fraction * mu)
        if per_second <= 0:
            logger.warning(f"No budget left for planned fetches after the passive reserve (mu {mu})")
            return None
        bookable = [it for it in self.value_table.itineraries()
                    if it.lead_days(day_start, self.start_date) >= 0]
        entries = build_plan_entries(bookable, lambda it: self.ttl_table.ttl_for(it, day_start),
                                     self.value_table.values())
        budget = per_second * DAY
        selected = select_top_requests(entries, budget, self.policy.admission)

        deadlines = {}
        for entry in selected:
            quote = self.db.peek(entry.itinerary)
            if quote is not None and quote.is_live(day_start):
                deadlines[entry.itinerary] = quote.expires_at - day_start
        previous = {}
        if self._plan is not None:
            previous = {it: seconds[0] for it, seconds in self._plan.send_times().items()}
        capacity = np.full(DAY, per_second, dtype=np.int64)

        base = sum(e.frequency for e in selected)
        accuracies = self.value_table.accuracies()
        plan = None
        for scale in self.SURPLUS_RETRY_SCALES:
            target = int(scale * self.policy.surplus_fill * budget)
            if target <= base:
                break
            planned = allocate_surplus(selected, target, accuracies)
            try:
                plan = build_schedule(planned, mu, capacity=capacity, deadlines=deadlines, previous=previous)
                break
            except ScheduleCapacityError as exc:
                logger.warning(f"Surplus refreshes up to {target:,} daily fetches do not fit ({exc}); "
                               f"trying fewer")
        if plan is None:
            plan = build_schedule(selected, mu, capacity=capacity, deadlines=deadlines, previous=previous)
        audit_plan(plan, enforce=True)
        return plan

    def _book(self, search: UserSearch, quote: PriceQuote, u: float, day: DayMetrics) -> bool:
        """Booking attempt on a served quote; returns whether the user tried to book."""
        if not quote.available or u >= self.booking_model.p_b(search.itinerary):
            return False
        day.attempts += 1
        price, available = self.prices.price_at(search.itinerary, search.timestamp)
        if available and (price == quote.price or abs(price - quote.price) <= self.price_tolerance * price):
            day.bookings += 1
        return True

    def _serve(self, search: UserSearch, u: float):
        now = search.timestamp
        day = self._day(now)
        day.searches += 1
        quote = self.db.get(search.itinerary, now)
        if quote is not None:
            day.hits += 1
            attempted = self._book(search, quote, u, day)
            if self.observations is not None:
                self._observe(search, quote, attempted)
        elif self.policy.fetches_on_miss:
            quote = self._fetch(search.itinerary, search.dc_id, now)
        if self.observations is not None:
            self.observations.searches[search.itinerary] += 1
            self.observations.last_cluster[search.itinerary] = cluster(
                search.itinerary, now, True, start_date=self.start_date)
        if self.lru is not None:
            self.lru.admit(search, quote)

    def _observe(self, search: UserSearch, quote: PriceQuote, attempted: bool):
        if not quote.available:
            return
        obs = self.observations
        key = cluster(search.itinerary, search.timestamp, True, start_date=self.start_date)
        obs.served[search.itinerary] += 1
        obs.served_by_cluster[key] += 1
        if attempted:
            obs.attempts[search.itinerary] += 1
            obs.attempts_by_cluster[key] += 1

    def _refresh_lru(self, now: int):
        budget = self.supplier.remaining_total(now)
        if budget <= 0 or len(self.lru) == 0:
            return
        mu = self.supplier.config.effective_qps
        for itinerary in lru_refresh_batch(self.lru, mu, mu - budget, now):
            quote = self._fetch_any_dc(itinerary, now)
            if quote is not None:
                self.lru.record_fetch(quote)

    def _searches_by_second(self, trace: Iterable[UserSearch]) -> Iterator[Tuple[int, List[Tuple[UserSearch, float]]]]:
        """Group the trace by second, drawing a booking uniform for every search."""
        current, batch = None, []
        dropped = 0
        for search in trace:
            u = self.draws.next()
            if search.timestamp >= self.horizon:
                dropped += 1
                continue
            if self.user_filter is not None and not self.user_filter(search):
                continue
            if current is not None and search.timestamp != current:
                yield current, batch
                batch = []
            current = search.timestamp
            batch.append((search, u))
        if batch:
            yield current, batch
        if dropped:
            logger.warning(f"Dropped {dropped:,} searches at or after the horizon {self.horizon:,}")

    def _log_progress(self, day_index: int):
        if day_index % SimulationConfig.PROGRESS_INTERVAL_DAYS == 0 and day_index < len(self.metrics.days):
            d = self.metrics.days[day_index]
            logger.info(f"[{self.arm}] day {day_index}: {d.searches:,} searches, hit {d.hit_rate:.3f}, "
                        f"{d.fetches:,} fetches, {d.bookings:,}/{d.attempts:,} bookings")

    def _run_passive(self, trace: Iterable[UserSearch]):
        last_day = None
        for second, batch in self._searches_by_second(trace):
            day_index = second // DAY
            if last_day is not None and day_index != last_day:
                self._log_progress(last_day)
            last_day = day_index
            for search, u in batch:
                self._serve(search, u)
        if last_day is not None:
            self._log_progress(last_day)

    def _run_aggressive(self, trace: Iterable[UserSearch]):
        groups = self._searches_by_second(trace)
        pending = next(groups, None)
        for now in range(self.horizon):
            if now % DAY == 0:
                if now:
                    self._log_progress(now // DAY - 1)
                if self.policy.variant == AGGRESSIVE_SMART_SCHEDULER:
                    self._plan = self._plan_day(now)
            if self._plan is not None:
                for itinerary in self._plan.sends_at(now % DAY):
                    self._fetch_any_dc(itinerary, now)
            if pending is not None and pending[0] == now:
                for search, u in pending[1]:
                    self._serve(search, u)
                pending = next(groups, None)
            if self.lru is not None:
                self._refresh_lru(now)
        self._log_progress((self.horizon - 1) // DAY)

    def run(self, trace: Iterable[UserSearch]) -> Metrics:
        if self.policy.is_aggressive:
            self._run_aggressive(trace)
        else:
            self._run_passive(trace)

        violations = self.supplier.audit()
        if violations:
            raise RuntimeError(f"Supplier QPS cap violated in {len(violations)} second(s): {violations[0]}")

        self.metrics.qps = self.supplier.limiter.per_second_totals()
        if self.record_utilization:
            self.metrics.utilization = self.supplier.utilization_report()
        self.metrics.stats = {
            "supplier": self.supplier.get_stats(),
            "price_db": self.db.get_stats(),
            "lru": self.lru.get_stats() if self.lru is not None else None,
        }
        total = self.metrics.total()
        logger.info(f"[{self.arm}] finished: {total.searches:,} searches, hit {total.hit_rate:.3f}, "
                    f"{total.fetches:,} fetches ({total.rejected:,} rejected), "
                    f"{total.bookings:,}/{total.attempts:,} bookings")
        return self.metrics


def run(trace: Iterable[UserSearch], supplier_config: SupplierConfig, policy: PolicySpec,
        price_process: PriceProcess, seed: int, **kwargs) -> Metrics:
    """Replay ``trace`` under one policy; keyword arguments go to SimulationEngine."""
    return SimulationEngine(supplier_config, policy, price_process, seed, **kwargs).run(trace)
