import bisect
import logging
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Tuple

import numpy as np

from config.loader import section
from config.settings import SimulationConfig
from core.errors import ConfigError
from core.types import Itinerary
from simulators.distributions import DistributionSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LeadBand:
    min_lead: int
    max_lead: int
    duration: DistributionSpec

    def contains(self, lead: int) -> bool:
        return self.min_lead <= lead <= self.max_lead


def parse_bands(text: str) -> Tuple[LeadBand, ...]:
    """'0-6=exponential:1200;7-29=exponential:3600' -> lead bands."""
    bands = []
    for part in text.split(';'):
        part = part.strip()
        if not part:
            continue
        span, _, spec = part.partition('=')
        lo, _, hi = span.partition('-')
        try:
            bands.append(LeadBand(int(lo), int(hi or lo), DistributionSpec.parse(spec)))
        except ValueError as exc:
            raise ConfigError(f"Cannot parse price duration band '{part}': {exc}") from exc
    return tuple(bands)


@dataclass(frozen=True)
class PriceProcessConfig:
    """How long prices stay unchanged and how new prices are drawn.

    Duration distributions are chosen per lead-day band (the lead of the itinerary when the
    segment starts); sold-out segments use their own distribution.
    """

    default_duration: DistributionSpec = field(default_factory=lambda: DistributionSpec.parse('exponential:3600'))
    lead_bands: Tuple[LeadBand, ...] = ()
    sold_out_duration: DistributionSpec = field(default_factory=lambda: DistributionSpec.parse('exponential:21600'))
    sold_out_probability: float = 0.0
    base_price_median: int = 15000
    base_price_sigma: float = 0.5
    price_jump_sigma: float = 0.08
    start_date: date = SimulationConfig.START_DATE

    KEYS = ('DURATION_DEFAULT', 'DURATION_BANDS', 'SOLD_OUT_DURATION', 'SOLD_OUT_PROBABILITY',
            'BASE_MEDIAN', 'BASE_SIGMA', 'JUMP_SIGMA')

    def __post_init__(self):
        if not 0.0 <= self.sold_out_probability <= 1.0:
            raise ConfigError(f"sold_out_probability must be between 0.0 and 1.0, got {self.sold_out_probability}")
        if self.base_price_median < 1 or self.base_price_sigma < 0 or self.price_jump_sigma <= 0:
            raise ConfigError("base price median must be >= 1, sigmas must be >= 0 (jump sigma > 0)")

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "PriceProcessConfig":
        raw = section(values, 'PRICE_', cls.KEYS)
        kwargs = {}
        if 'DURATION_DEFAULT' in raw:
            kwargs['default_duration'] = DistributionSpec.parse(raw['DURATION_DEFAULT'])
        if 'DURATION_BANDS' in raw:
            kwargs['lead_bands'] = parse_bands(raw['DURATION_BANDS'])
        if 'SOLD_OUT_DURATION' in raw:
            kwargs['sold_out_duration'] = DistributionSpec.parse(raw['SOLD_OUT_DURATION'])
        try:
            if 'SOLD_OUT_PROBABILITY' in raw:
                kwargs['sold_out_probability'] = float(raw['SOLD_OUT_PROBABILITY'])
            if 'BASE_MEDIAN' in raw:
                kwargs['base_price_median'] = int(raw['BASE_MEDIAN'])
            if 'BASE_SIGMA' in raw:
                kwargs['base_price_sigma'] = float(raw['BASE_SIGMA'])
            if 'JUMP_SIGMA' in raw:
                kwargs['price_jump_sigma'] = float(raw['JUMP_SIGMA'])
        except ValueError as exc:
            raise ConfigError(f"Invalid price process config value: {exc}") from exc
        return cls(**kwargs)

    def duration_for(self, lead: int, available: bool) -> DistributionSpec:
        if not available:
            return self.sold_out_duration
        for band in self.lead_bands:
            if band.contains(lead):
                return band.duration
        return self.default_duration


class PriceTimeline:
    """Piecewise-constant price function: segment i holds from starts[i] until starts[i+1]."""

    def __init__(self, starts: List[int], prices: List[int], available: List[bool]):
        self.starts = starts
        self.prices = prices
        self.available = available

    def __len__(self):
        return len(self.starts)

    def segment_index(self, t: int) -> int:
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def price_at(self, t: int) -> Tuple[int, bool]:
        i = self.segment_index(t)
        return self.prices[i], self.available[i]

    def segments(self) -> List[Tuple[int, int, bool]]:
        return list(zip(self.starts, self.prices, self.available))

    def segment_lengths(self, horizon: int) -> List[int]:
        """Lengths of completed segments (the last one is cut by the horizon and left out)."""
        return [b - a for a, b in zip(self.starts, self.starts[1:]) if b <= horizon]


class _Draws:
    """Block-sampled draws per distribution so each segment does not pay a numpy call."""

    BLOCK = 256

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._buffers: Dict[DistributionSpec, Tuple[List[int], int]] = {}

    def duration(self, spec: DistributionSpec) -> int:
        values, pos = self._buffers.get(spec, ([], 0))
        if pos >= len(values):
            values, pos = spec.sample(self.rng, self.BLOCK).tolist(), 0
        self._buffers[spec] = (values, pos + 1)
        return values[pos]


def generate_price_timeline(config: PriceProcessConfig, itinerary: Itinerary, horizon: int,
                            seed: int) -> PriceTimeline:
    rng = np.random.default_rng([seed, itinerary.digest()])
    draws = _Draws(rng)

    price = max(int(round(config.base_price_median * math.exp(rng.normal(0.0, config.base_price_sigma)))), 100)
    last_available_price = price
    available = True
    starts, prices, flags = [0], [price], [True]

    t = 0
    while True:
        spec = config.duration_for(itinerary.lead_days(t, config.start_date), available)
        if spec.is_infinite:
            break
        t += draws.duration(spec)
        if t >= horizon:
            break

        if available and config.sold_out_probability > 0 and rng.random() < config.sold_out_probability:
            available, price = False, 0
        else:
            # every boundary is a real change of (price, availability)
            new_price = int(round(last_available_price * math.exp(rng.normal(0.0, config.price_jump_sigma))))
            if available and new_price == last_available_price:
                new_price += 1 if rng.random() < 0.5 or new_price <= 1 else -1
            available, price = True, max(new_price, 1)
            last_available_price = price
        starts.append(t)
        prices.append(price)
        flags.append(available)

    return PriceTimeline(starts, prices, flags)


class PriceProcess:
    """Ground-truth prices for every itinerary, built lazily and cached per itinerary."""

    def __init__(self, config: PriceProcessConfig, horizon: int, seed: int):
        self.config = config
        self.horizon = horizon
        self.seed = seed
        self._timelines: Dict[Itinerary, PriceTimeline] = {}

        logger.info(f"PriceProcess configured - default duration {config.default_duration.to_text()}, "
                    f"{len(config.lead_bands)} lead band(s), sold-out prob {config.sold_out_probability:.2f}")

    def timeline(self, itinerary: Itinerary) -> PriceTimeline:
        timeline = self._timelines.get(itinerary)
        if timeline is None:
            timeline = generate_price_timeline(self.config, itinerary, self.horizon, self.seed)
            self._timelines[itinerary] = timeline
        return timeline

    def price_at(self, itinerary: Itinerary, t: int) -> Tuple[int, bool]:
        return self.timeline(itinerary).price_at(t)

    def get_stats(self) -> Dict:
        segment_counts = [len(tl) for tl in self._timelines.values()]
        return {
            "itineraries": len(self._timelines),
            "segments": sum(segment_counts),
            "mean_segments": float(np.mean(segment_counts)) if segment_counts else 0.0,
        }


def static_price_process(horizon: int, seed: int = 0) -> PriceProcess:
    return PriceProcess(PriceProcessConfig(default_duration=DistributionSpec('constant')), horizon, seed)
