import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from config.loader import section
from config.settings import SupplierDefaults
from core.errors import ConfigError
from core.types import Itinerary, PriceQuote
from simulators.price_process import PriceProcess
from supplier.rate_limiter import RateLimiter

logger = logging.getLogger(__name__)


def even_allocation(qps_limit: int, n_datacentres: int) -> Tuple[int, ...]:
    base, extra = divmod(qps_limit, n_datacentres)
    return tuple(base + (1 if dc < extra else 0) for dc in range(n_datacentres))


@dataclass(frozen=True)
class SupplierConfig:
    qps_limit: int = SupplierDefaults.QPS_LIMIT
    n_datacentres: int = SupplierDefaults.N_DATACENTRES
    per_dc_allocation: Tuple[int, ...] = field(default=())

    KEYS = ('QPS_LIMIT', 'N_DATACENTRES', 'PER_DC_ALLOCATION')

    def __post_init__(self):
        if self.qps_limit <= 0:
            raise ConfigError(f"qps_limit must be an integer > 0, got {self.qps_limit}")
        if self.n_datacentres < 1:
            raise ConfigError(f"n_datacentres must be >= 1, got {self.n_datacentres}")
        if not self.per_dc_allocation:
            object.__setattr__(self, 'per_dc_allocation', even_allocation(self.qps_limit, self.n_datacentres))
        if len(self.per_dc_allocation) != self.n_datacentres:
            raise ConfigError(f"per_dc_allocation has {len(self.per_dc_allocation)} entries "
                              f"for {self.n_datacentres} data centres")
        if any(a < 0 for a in self.per_dc_allocation) or sum(self.per_dc_allocation) > self.qps_limit:
            raise ConfigError(f"per_dc_allocation {list(self.per_dc_allocation)} must be >= 0 "
                              f"and sum to <= qps_limit {self.qps_limit}")

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "SupplierConfig":
        raw = section(values, 'SUPPLIER_', cls.KEYS)
        try:
            kwargs = {}
            if 'QPS_LIMIT' in raw:
                kwargs['qps_limit'] = int(raw['QPS_LIMIT'])
            if 'N_DATACENTRES' in raw:
                kwargs['n_datacentres'] = int(raw['N_DATACENTRES'])
            if raw.get('PER_DC_ALLOCATION'):
                kwargs['per_dc_allocation'] = tuple(int(a) for a in raw['PER_DC_ALLOCATION'].split(','))
        except ValueError as exc:
            raise ConfigError(f"Invalid supplier config value: {exc}") from exc
        return cls(**kwargs)

    @property
    def effective_qps(self) -> int:
        return min(self.qps_limit, sum(self.per_dc_allocation))

    def split(self, n_arms: int = 2) -> "SupplierConfig":
        """Budget of one experiment arm: floor(mu / n_arms), spread over DCs like the full allocation."""
        arm_qps = self.qps_limit // n_arms
        if arm_qps < 1:
            raise ConfigError(f"qps_limit {self.qps_limit} cannot be split across {n_arms} arms")
        shares = [a / n_arms for a in self.per_dc_allocation]
        allocation = [int(s) for s in shares]
        budget = min(arm_qps, sum(self.per_dc_allocation) // n_arms) - sum(allocation)
        # hand leftover units to the largest fractional shares, lowest DC id first
        for dc in sorted(range(len(shares)), key=lambda d: (-(shares[d] - allocation[d]), d)):
            if budget <= 0:
                break
            allocation[dc] += 1
            budget -= 1
        if sum(allocation) == 0:
            allocation[0] = 1
        return SupplierConfig(arm_qps, self.n_datacentres, tuple(allocation))


class Supplier:
    """Rate-limited supplier answering from the ground-truth price process."""

    def __init__(self, config: SupplierConfig, prices: PriceProcess):
        self.config = config
        self.prices = prices
        self.limiter = RateLimiter(config.qps_limit, config.per_dc_allocation)

        logger.info(f"Supplier configured - mu {config.qps_limit}/s, "
                    f"allocation {list(config.per_dc_allocation)}")

    def fetch(self, itinerary: Itinerary, dc_id: int, now: int) -> Optional[PriceQuote]:
        """Price at ``now`` without a TTL, or None when the DC's budget for this second is used up."""
        if not self.limiter.try_acquire(dc_id, now):
            return None
        price, available = self.prices.price_at(itinerary, now)
        return PriceQuote(itinerary, price, now, None, available)

    def remaining(self, dc_id: int, now: int) -> int:
        return self.limiter.remaining(dc_id, now)

    def remaining_total(self, now: int) -> int:
        return self.limiter.remaining_total(now)

    def utilization_report(self, horizon: Optional[int] = None) -> pd.DataFrame:
        return self.limiter.utilization_report(horizon)

    def audit(self) -> List[str]:
        return self.limiter.audit()

    def get_stats(self) -> Dict:
        return {
            "accepted": self.limiter.accepted_total,
            "rejected": self.limiter.rejected_total,
            "qps_limit": self.config.qps_limit,
            "allocation": list(self.config.per_dc_allocation),
        }
