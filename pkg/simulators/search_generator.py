import logging
import math
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from config.loader import section
from config.settings import SimulationConfig, TTLConfig
from core.errors import ConfigError
from core.types import Itinerary, SearchCriteria, UserSearch, stable_hash
from simulators.distributions import DistributionSpec
from simulators.traffic_profile import TrafficProfile

logger = logging.getLogger(__name__)

DEFAULT_LEAD_HISTOGRAM = '0-6=0.35,7-29=0.35,30-89=0.2,90-365=0.1'


def parse_lead_histogram(text: str) -> Tuple[float, ...]:
    """'lo-hi=weight,...' over lead days 0..365 -> 366 per-day weights."""
    weights = np.zeros(TTLConfig.LEAD_CAP_DAYS + 1)
    try:
        for part in text.split(','):
            span, _, weight = part.partition('=')
            lo, _, hi = span.partition('-')
            lo, hi = int(lo), int(hi or lo)
            if not 0 <= lo <= hi <= TTLConfig.LEAD_CAP_DAYS:
                raise ValueError(f"lead range {span} outside 0..{TTLConfig.LEAD_CAP_DAYS}")
            weights[lo:hi + 1] += float(weight) / (hi - lo + 1)
    except ValueError as exc:
        raise ConfigError(f"Cannot parse checkin lead histogram '{text}': {exc}") from exc
    if weights.min() < 0 or weights.sum() <= 0:
        raise ConfigError(f"Checkin lead histogram needs nonnegative weights with a positive sum: '{text}'")
    return tuple(float(w) for w in weights)


def zipf_weights(n: int, skew: float) -> np.ndarray:
    """Normalized Zipf weights 1/rank^skew for ranks 1..n."""
    ranks = np.arange(1, n + 1, dtype=float)
    weights = 1.0 / ranks ** skew
    return weights / weights.sum()


@dataclass(frozen=True)
class WorkloadConfig:
    n_hotels: int = 100
    itineraries_per_hotel: int = 20
    n_users: int = 5000
    horizon: int = SimulationConfig.HORIZON_DAYS * SimulationConfig.SECONDS_PER_DAY
    popularity_skew: float = 1.0
    searches_per_second: float = 0.5
    gap_time_distribution: Optional[DistributionSpec] = None
    checkin_lead_distribution: Tuple[float, ...] = field(
        default_factory=lambda: parse_lead_histogram(DEFAULT_LEAD_HISTOGRAM))
    dc_traffic_profiles: Tuple[TrafficProfile, ...] = field(
        default_factory=lambda: (TrafficProfile.named('evening_peak'),))
    max_nights: int = 3
    booking_alpha: float = 2.0
    booking_beta: float = 30.0
    start_date: date = SimulationConfig.START_DATE
    seed: int = 1

    KEYS = ('N_HOTELS', 'ITINERARIES_PER_HOTEL', 'N_USERS', 'HORIZON_DAYS', 'HORIZON_SECONDS',
            'POPULARITY_SKEW', 'SEARCHES_PER_SECOND', 'GAP_TIME_DISTRIBUTION',
            'CHECKIN_LEAD_DISTRIBUTION', 'DC_TRAFFIC_PROFILES', 'MAX_NIGHTS',
            'BOOKING_ALPHA', 'BOOKING_BETA', 'START_DATE', 'SEED')

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigError(f"horizon must be > 0, got {self.horizon}")
        if self.n_hotels < 1 or self.itineraries_per_hotel < 1 or self.n_users < 1:
            raise ConfigError("n_hotels, itineraries_per_hotel and n_users must be >= 1")
        if self.popularity_skew < 0:
            raise ConfigError(f"popularity_skew must be >= 0, got {self.popularity_skew}")
        if self.searches_per_second < 0:
            raise ConfigError(f"searches_per_second must be >= 0, got {self.searches_per_second}")
        if not self.dc_traffic_profiles:
            raise ConfigError("At least one data-centre traffic profile is required")
        if len(self.checkin_lead_distribution) != TTLConfig.LEAD_CAP_DAYS + 1:
            raise ConfigError(f"checkin lead histogram must cover days 0..{TTLConfig.LEAD_CAP_DAYS}")
        if self.max_nights < 1:
            raise ConfigError(f"max_nights must be >= 1, got {self.max_nights}")

    @property
    def n_datacentres(self) -> int:
        return len(self.dc_traffic_profiles)

    @property
    def horizon_days(self) -> int:
        return math.ceil(self.horizon / SimulationConfig.SECONDS_PER_DAY)

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "WorkloadConfig":
        raw = section(values, 'WORKLOAD_', cls.KEYS)
        kwargs = {}
        try:
            for name in ('N_HOTELS', 'ITINERARIES_PER_HOTEL', 'N_USERS', 'MAX_NIGHTS', 'SEED'):
                if name in raw:
                    kwargs[name.lower()] = int(raw[name])
            for name in ('POPULARITY_SKEW', 'SEARCHES_PER_SECOND', 'BOOKING_ALPHA', 'BOOKING_BETA'):
                if name in raw:
                    kwargs[name.lower()] = float(raw[name])
            if 'HORIZON_SECONDS' in raw:
                kwargs['horizon'] = int(raw['HORIZON_SECONDS'])
            elif 'HORIZON_DAYS' in raw:
                kwargs['horizon'] = int(raw['HORIZON_DAYS']) * SimulationConfig.SECONDS_PER_DAY
            if 'START_DATE' in raw:
                kwargs['start_date'] = date.fromisoformat(raw['START_DATE'])
        except ValueError as exc:
            raise ConfigError(f"Invalid workload config value: {exc}") from exc
        if raw.get('GAP_TIME_DISTRIBUTION'):
            kwargs['gap_time_distribution'] = DistributionSpec.parse(raw['GAP_TIME_DISTRIBUTION'])
        if 'CHECKIN_LEAD_DISTRIBUTION' in raw:
            kwargs['checkin_lead_distribution'] = parse_lead_histogram(raw['CHECKIN_LEAD_DISTRIBUTION'])
        if 'DC_TRAFFIC_PROFILES' in raw:
            kwargs['dc_traffic_profiles'] = tuple(
                TrafficProfile.parse(p) for p in raw['DC_TRAFFIC_PROFILES'].split(';') if p.strip())
        return cls(**kwargs)

    def with_seed(self, seed: int) -> "WorkloadConfig":
        return replace(self, seed=seed)


class SearchGenerator:
    """Synthetic search trace over a fixed itinerary universe.

    The universe and popularity depend only on the config seed; ``stream`` selects an
    independent set of arrivals over the same universe (stream 0 is the evaluation
    trace, other streams serve as training history).
    """

    def __init__(self, config: WorkloadConfig, stream: int = 0):
        self.config = config
        self.stream = stream
        root = np.random.SeedSequence(config.seed)
        universe_seq, popularity_seq = root.spawn(2)
        self._arrival_seq = np.random.SeedSequence([config.seed, stream, 1])

        self.itineraries = self._build_universe(np.random.default_rng(universe_seq))
        rng = np.random.default_rng(popularity_seq)
        # Popularity ranks are shuffled so hotel order does not imply popularity
        order = rng.permutation(len(self.itineraries))
        weights = zipf_weights(len(self.itineraries), config.popularity_skew)
        self.popularity = np.empty(len(self.itineraries))
        self.popularity[order] = weights

        self._user_ids: Dict[int, str] = {}
        self.events_generated = 0

        mode = 'renewal' if config.gap_time_distribution is not None else 'poisson'
        logger.info(f"SearchGenerator configured - {len(self.itineraries):,} itineraries, "
                    f"{config.n_datacentres} DC(s), skew {config.popularity_skew}, mode {mode}")

    def _build_universe(self, rng: np.random.Generator) -> List[Itinerary]:
        cfg = self.config
        n = cfg.n_hotels * cfg.itineraries_per_hotel
        lead_weights = np.array(cfg.checkin_lead_distribution)
        leads = rng.choice(len(lead_weights), size=n, p=lead_weights / lead_weights.sum())
        nights = rng.integers(1, cfg.max_nights + 1, size=n)
        adults = rng.choice([1, 2, 3, 4], size=n, p=[0.3, 0.6, 0.05, 0.05])
        children = rng.choice([0, 1, 2], size=n, p=[0.8, 0.1, 0.1])
        rooms = rng.choice([1, 2], size=n, p=[0.9, 0.1])

        # Leads count from the end of the horizon so no check-in passes during the run
        anchor = cfg.start_date + timedelta(days=cfg.horizon_days)
        seen = set()
        universe = []
        for i in range(n):
            checkin = anchor + timedelta(days=int(leads[i]))
            itinerary = Itinerary(
                hotel_id=f"H{i // cfg.itineraries_per_hotel:05d}",
                criteria=SearchCriteria(
                    checkin=checkin,
                    checkout=checkin + timedelta(days=int(nights[i])),
                    adults=int(adults[i]),
                    children=int(children[i]),
                    rooms=int(rooms[i]),
                ),
            )
            if itinerary not in seen:
                seen.add(itinerary)
                universe.append(itinerary)
        return universe

    def _user_id(self, index: int) -> str:
        user_id = self._user_ids.get(index)
        if user_id is None:
            user_id = f"U{index:07d}"
            self._user_ids[index] = user_id
        return user_id

    def _poisson_arrivals(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        cfg = self.config
        rng = np.random.default_rng(self._arrival_seq)
        day = SimulationConfig.SECONDS_PER_DAY
        times, dcs = [], []
        for dc_id, profile in enumerate(cfg.dc_traffic_profiles):
            peak_rate = cfg.searches_per_second * profile.max_multiplier
            if peak_rate <= 0:
                continue
            for day_start in range(0, cfg.horizon, day):
                span = min(day, cfg.horizon - day_start)
                n = rng.poisson(peak_rate * span)
                candidates = day_start + rng.random(n) * span
                # thinning: keep each candidate with probability rate(t) / peak rate
                keep = rng.random(n) * profile.max_multiplier < profile.rate_multiplier(candidates)
                accepted = np.floor(candidates[keep]).astype(np.int64)
                times.append(accepted)
                dcs.append(np.full(len(accepted), dc_id, dtype=np.int64))
        if not times:
            empty = np.array([], dtype=np.int64)
            return empty, empty, empty
        times = np.concatenate(times)
        dcs = np.concatenate(dcs)
        itinerary_index = rng.choice(len(self.itineraries), size=len(times), p=self.popularity)
        order = np.lexsort((dcs, times))
        return times[order], dcs[order], itinerary_index[order]

    def _renewal_arrivals(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        cfg = self.config
        spec = cfg.gap_time_distribution
        n = len(self.itineraries)
        times, items = [], []
        for index, itinerary in enumerate(self.itineraries):
            if spec.is_infinite:
                break
            # popularity scales the gap rate; mean scale is 1 so skew 0 keeps the gap distribution
            scale = self.popularity[index] * n
            rng = np.random.default_rng([cfg.seed, self.stream, itinerary.digest()])
            expected = int(cfg.horizon * scale / spec.mean()) + 16
            clock, chunks = 0, []
            while clock < cfg.horizon:
                # the epsilon absorbs rounding in the normalized weights (scale is 1 +- ulp at skew 0)
                gaps = np.maximum(np.ceil(spec.sample(rng, expected) / scale - 1e-9), 1).astype(np.int64)
                arrivals = clock + np.cumsum(gaps)
                clock = int(arrivals[-1])
                chunks.append(arrivals[arrivals < cfg.horizon])
            arrivals = np.concatenate(chunks) if chunks else np.array([], dtype=np.int64)
            times.append(arrivals)
            items.append(np.full(len(arrivals), index, dtype=np.int64))
        if not times:
            empty = np.array([], dtype=np.int64)
            return empty, empty, empty
        times = np.concatenate(times)
        items = np.concatenate(items)

        rng = np.random.default_rng(self._arrival_seq)
        rates = np.stack([p.rate_multiplier(times) for p in cfg.dc_traffic_profiles], axis=1)
        totals = rates.sum(axis=1, keepdims=True)
        shares = np.divide(rates, totals, out=np.zeros_like(rates), where=totals > 0)
        cumulative = np.cumsum(shares, axis=1)
        u = rng.random(len(times))[:, None]
        dcs = np.minimum((u >= cumulative).sum(axis=1), cfg.n_datacentres - 1)

        order = np.lexsort((items, dcs, times))
        return times[order], dcs[order].astype(np.int64), items[order]

    def stream_searches(self) -> Iterator[UserSearch]:
        if self.config.gap_time_distribution is None:
            times, dcs, items = self._poisson_arrivals()
        else:
            times, dcs, items = self._renewal_arrivals()

        users = np.random.default_rng(stable_hash('users', self.config.seed, self.stream)).integers(
            self.config.n_users, size=len(times))
        for t, dc, item, user in zip(times.tolist(), dcs.tolist(), items.tolist(), users.tolist()):
            self.events_generated += 1
            yield UserSearch(self._user_id(user), self.itineraries[item], t, dc)

    def get_stats(self) -> Dict:
        return {
            "itineraries": len(self.itineraries),
            "events_generated": self.events_generated,
            "datacentres": self.config.n_datacentres,
            "popularity_skew": self.config.popularity_skew,
            "top_itinerary_share": float(self.popularity.max()),
        }


def generate_searches(config: WorkloadConfig, stream: int = 0) -> Iterator[UserSearch]:
    return SearchGenerator(config, stream).stream_searches()
