import logging
import math
from typing import Dict, List, Sequence

import numpy as np

from config.settings import SimulationConfig
from core.errors import ConfigError

logger = logging.getLogger(__name__)


def _peaked(peak_hour: int, low: float = 0.1) -> List[float]:
    return [
        low + (1.0 - low) * (1 + math.cos(2 * math.pi * (h - peak_hour) / 24)) / 2
        for h in range(24)
    ]


def _business_hours() -> List[float]:
    hourly = []
    for h in range(24):
        if 9 <= h <= 12 or 14 <= h <= 17:
            hourly.append(1.5)
        elif 20 <= h <= 23:
            hourly.append(1.2)
        elif 0 <= h <= 6:
            hourly.append(0.5)
        else:
            hourly.append(1.0)
    return hourly


class TrafficProfile:
    """Diurnal arrival-rate multipliers for one data centre.

    Each of the 24 values is the multiplier at the middle of its hour; the rate between
    two midpoints is interpolated linearly and wraps around midnight.
    """

    NAMED_PROFILES = ('flat', 'evening_peak', 'night_peak', 'business_hours')

    def __init__(self, hourly: Sequence[float], name: str = 'custom'):
        if len(hourly) != 24:
            raise ConfigError(f"A traffic profile needs 24 hourly multipliers, got {len(hourly)}")
        if min(hourly) < 0:
            raise ConfigError(f"Traffic multipliers must be >= 0, got {min(hourly)}")
        self.hourly = [float(m) for m in hourly]
        self.name = name
        # midpoints with one wrapped point on each side for np.interp
        self._xp = np.array([-0.5] + [h + 0.5 for h in range(24)] + [24.5]) * 3600
        self._fp = np.array([self.hourly[-1]] + self.hourly + [self.hourly[0]])

    @classmethod
    def named(cls, name: str) -> "TrafficProfile":
        profiles: Dict[str, List[float]] = {
            'flat': [1.0] * 24,
            'evening_peak': _peaked(18),
            'night_peak': _peaked(4),
            'business_hours': _business_hours(),
        }
        if name.startswith('peak:'):
            return cls(_peaked(int(name.split(':', 1)[1]) % 24), name=name)
        if name not in profiles:
            raise ConfigError(f"Profile '{name}' is not valid. "
                              f"Options: {list(profiles.keys())} or peak:<hour>")
        return cls(profiles[name], name=name)

    @classmethod
    def parse(cls, text: str) -> "TrafficProfile":
        text = text.strip()
        if ',' not in text:
            return cls.named(text)
        try:
            return cls([float(v) for v in text.split(',')])
        except ValueError as exc:
            raise ConfigError(f"Cannot parse traffic profile '{text}': {exc}") from exc

    def to_text(self) -> str:
        if self.name != 'custom':
            return self.name
        return ','.join(f"{m:g}" for m in self.hourly)

    @property
    def max_multiplier(self) -> float:
        return max(self.hourly)

    @property
    def mean_multiplier(self) -> float:
        return sum(self.hourly) / 24

    def rate_multiplier(self, seconds) -> np.ndarray:
        seconds_of_day = np.asarray(seconds, dtype=float) % SimulationConfig.SECONDS_PER_DAY
        return np.interp(seconds_of_day, self._xp, self._fp)

    def peak_hour(self) -> int:
        return int(np.argmax(self.hourly))
