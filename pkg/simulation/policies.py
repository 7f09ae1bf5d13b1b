import logging
from dataclasses import dataclass
from typing import Optional

from config.settings import SchedulerConfig
from core.errors import ConfigError

logger = logging.getLogger(__name__)

PASSIVE_FIXED_TTL = 'passive_fixed_ttl'
PASSIVE_SMART_TTL = 'passive_smart_ttl'
AGGRESSIVE_LRU = 'aggressive_lru'
AGGRESSIVE_SMART_SCHEDULER = 'aggressive_smart_scheduler'

VARIANTS = (PASSIVE_FIXED_TTL, PASSIVE_SMART_TTL, AGGRESSIVE_LRU, AGGRESSIVE_SMART_SCHEDULER)


@dataclass(frozen=True)
class PolicySpec:
    """One fetch policy with its parameters.

    Text form:
        passive_fixed_ttl:900
        passive_smart_ttl
        aggressive_lru:5000          (LRU capacity; quotes use SmartTTL TTLs)
        aggressive_lru:5000:900      (LRU capacity, fixed TTL)
        aggressive_smart_scheduler
        aggressive_smart_scheduler:0.2   (fraction of each second reserved for passive misses)
        aggressive_smart_scheduler:0:0.5 (no reserve, surplus refreshes fill at most half the budget)
    """

    variant: str
    ttl: Optional[int] = None
    capacity: Optional[int] = None
    reserve_passive_fraction: float = SchedulerConfig.RESERVE_PASSIVE_FRACTION
    admission: str = SchedulerConfig.ADMISSION
    surplus_fill: float = SchedulerConfig.SURPLUS_FILL

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"Policy '{self.variant}' is not valid. Options: {list(VARIANTS)}")
        if self.variant == PASSIVE_FIXED_TTL and (self.ttl is None or self.ttl <= 0):
            raise ConfigError(f"{PASSIVE_FIXED_TTL} needs a TTL > 0, got {self.ttl}")
        if self.ttl is not None and self.ttl <= 0:
            raise ConfigError(f"ttl must be > 0, got {self.ttl}")
        if self.variant == AGGRESSIVE_LRU and (self.capacity is None or self.capacity < 1):
            raise ConfigError(f"{AGGRESSIVE_LRU} needs a capacity >= 1, got {self.capacity}")
        if not 0.0 <= self.reserve_passive_fraction <= 1.0:
            raise ConfigError(f"reserve_passive_fraction must be between 0.0 and 1.0, "
                              f"got {self.reserve_passive_fraction}")
        if not 0.0 <= self.surplus_fill <= 1.0:
            raise ConfigError(f"surplus_fill must be between 0.0 and 1.0, got {self.surplus_fill}")

    @classmethod
    def parse(cls, text: str) -> "PolicySpec":
        name, *args = [part.strip() for part in text.strip().split(':')]
        try:
            if name == PASSIVE_FIXED_TTL:
                if len(args) != 1:
                    raise ConfigError(f"{PASSIVE_FIXED_TTL} takes one TTL argument: '{text}'")
                return cls(name, ttl=int(args[0]))
            if name == PASSIVE_SMART_TTL:
                return cls(name)
            if name == AGGRESSIVE_LRU:
                if len(args) not in (1, 2):
                    raise ConfigError(f"{AGGRESSIVE_LRU} takes a capacity and an optional TTL: '{text}'")
                return cls(name, capacity=int(args[0]), ttl=int(args[1]) if len(args) == 2 else None)
            if name == AGGRESSIVE_SMART_SCHEDULER:
                if len(args) > 2:
                    raise ConfigError(f"{AGGRESSIVE_SMART_SCHEDULER} takes a reserve and an optional fill: '{text}'")
                reserve = float(args[0]) if args else SchedulerConfig.RESERVE_PASSIVE_FRACTION
                fill = float(args[1]) if len(args) == 2 else SchedulerConfig.SURPLUS_FILL
                return cls(name, reserve_passive_fraction=reserve, surplus_fill=fill)
        except ValueError as exc:
            raise ConfigError(f"Cannot parse policy '{text}': {exc}") from exc
        raise ConfigError(f"Policy '{name}' is not valid. Options: {list(VARIANTS)}")

    def to_text(self) -> str:
        if self.variant == PASSIVE_FIXED_TTL:
            return f"{self.variant}:{self.ttl}"
        if self.variant == AGGRESSIVE_LRU:
            return f"{self.variant}:{self.capacity}" + (f":{self.ttl}" if self.ttl is not None else "")
        if self.variant == AGGRESSIVE_SMART_SCHEDULER and self.surplus_fill != SchedulerConfig.SURPLUS_FILL:
            return f"{self.variant}:{self.reserve_passive_fraction:g}:{self.surplus_fill:g}"
        if self.variant == AGGRESSIVE_SMART_SCHEDULER and self.reserve_passive_fraction > 0:
            return f"{self.variant}:{self.reserve_passive_fraction:g}"
        return self.variant

    @property
    def is_aggressive(self) -> bool:
        return self.variant in (AGGRESSIVE_LRU, AGGRESSIVE_SMART_SCHEDULER)

    @property
    def fetches_on_miss(self) -> bool:
        if self.variant == AGGRESSIVE_SMART_SCHEDULER:
            return self.reserve_passive_fraction > 0
        return True

    @property
    def uses_smart_ttl(self) -> bool:
        return self.variant in (PASSIVE_SMART_TTL, AGGRESSIVE_SMART_SCHEDULER) or (
            self.variant == AGGRESSIVE_LRU and self.ttl is None)

    @property
    def needs_model(self) -> bool:
        return self.uses_smart_ttl
