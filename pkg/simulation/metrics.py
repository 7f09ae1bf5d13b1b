import logging
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ['day', 'arm', 'searches', 'hits', 'hit_rate', 'fetches', 'rejected', 'attempts',
                   'bookings', 'accuracy']


@dataclass
class DayMetrics:
    searches: int = 0
    hits: int = 0
    fetches: int = 0
    rejected: int = 0
    attempts: int = 0
    bookings: int = 0

    @property
    def misses(self) -> int:
        return self.searches - self.hits

    @property
    def hit_rate(self) -> float:
        return self.hits / self.searches if self.searches else 0.0

    @property
    def accuracy(self) -> float:
        """Share of booking attempts made on the supplier's current price."""
        return self.bookings / self.attempts if self.attempts else 0.0

    def add(self, other: "DayMetrics"):
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


@dataclass
class Metrics:
    arm: str
    days: List[DayMetrics]
    qps: Optional[pd.Series] = None
    stats: Dict = field(default_factory=dict)
    # per (dc_id, second) supplier calls; only filled when the run is asked to record it
    utilization: Optional[pd.DataFrame] = None

    @classmethod
    def empty(cls, arm: str, n_days: int) -> "Metrics":
        return cls(arm, [DayMetrics() for _ in range(n_days)])

    def day(self, index: int) -> DayMetrics:
        return self.days[index]

    def total(self) -> DayMetrics:
        total = DayMetrics()
        for day in self.days:
            total.add(day)
        return total

    @property
    def bookings(self) -> int:
        return self.total().bookings

    @property
    def hit_rate(self) -> float:
        return self.total().hit_rate

    def to_frame(self, include_total: bool = True) -> pd.DataFrame:
        rows = [self._row(str(i), d) for i, d in enumerate(self.days)]
        if include_total:
            rows.append(self._row('total', self.total()))
        return pd.DataFrame(rows, columns=METRICS_COLUMNS)

    def _row(self, label: str, d: DayMetrics) -> Dict:
        return {
            'day': label,
            'arm': self.arm,
            'searches': d.searches,
            'hits': d.hits,
            'hit_rate': round(d.hit_rate, 6),
            'fetches': d.fetches,
            'rejected': d.rejected,
            'attempts': d.attempts,
            'bookings': d.bookings,
            'accuracy': round(d.accuracy, 6),
        }
