import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import pandas as pd

from core.errors import TraceParseError
from core.types import Itinerary, validate_probability
from scheduler.planning import itinerary_value

logger = logging.getLogger(__name__)

VALUE_TABLE_COLUMNS = ['hotel_id', 'checkin', 'checkout', 'adults', 'children', 'rooms',
                       'p_b', 'p_a', 'daily_searches']


@dataclass(frozen=True)
class ValueRow:
    itinerary: Itinerary
    p_b: float
    p_a: float
    daily_searches: float = 1.0

    def __post_init__(self):
        validate_probability(self.p_b, "p_b")
        validate_probability(self.p_a, "p_a")
        if self.daily_searches < 0:
            raise ValueError(f"daily_searches must be >= 0, got {self.daily_searches}")

    @property
    def value(self) -> float:
        """Expected bookings per day if the itinerary is always cached."""
        return itinerary_value([(self.p_b, self.p_a)]) * self.daily_searches


class ValueTable:
    """Per-itinerary booking propensity, accuracy estimate and daily search volume."""

    def __init__(self, rows: Iterable[ValueRow]):
        self._rows: Dict[Itinerary, ValueRow] = {row.itinerary: row for row in rows}

    def __len__(self):
        return len(self._rows)

    def __contains__(self, itinerary: Itinerary) -> bool:
        return itinerary in self._rows

    def get(self, itinerary: Itinerary) -> Optional[ValueRow]:
        return self._rows.get(itinerary)

    def rows(self) -> List[ValueRow]:
        return list(self._rows.values())

    def itineraries(self) -> List[Itinerary]:
        return list(self._rows)

    def values(self) -> Dict[Itinerary, float]:
        return {it: row.value for it, row in self._rows.items()}

    def accuracies(self) -> Dict[Itinerary, float]:
        return {it: row.p_a for it, row in self._rows.items()}

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self._rows.values():
            f = row.itinerary.to_fields()
            records.append((f['hotel_id'], f['checkin'], f['checkout'], f['adults'], f['children'], f['rooms'],
                            row.p_b, row.p_a, row.daily_searches))
        return pd.DataFrame(records, columns=VALUE_TABLE_COLUMNS)

    def write_csv(self, path: str):
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator='\n', float_format='%.9g')
        logger.info(f"Wrote value table with {len(self._rows):,} itineraries to {path}")

    @classmethod
    def read_csv(cls, path: str) -> "ValueTable":
        if not os.path.exists(path):
            raise FileNotFoundError(f"Value table not found: {path}")
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
        missing = [c for c in VALUE_TABLE_COLUMNS[:-1] if c not in df.columns]
        if missing:
            raise TraceParseError(path, 1, f"missing columns: {', '.join(missing)}")
        if 'daily_searches' not in df.columns:
            df['daily_searches'] = '1'
        rows = []
        for line_number, r in enumerate(df.itertuples(index=False), start=2):
            try:
                itinerary = Itinerary.from_fields(r.hotel_id, r.checkin, r.checkout, r.adults, r.children, r.rooms)
                rows.append(ValueRow(itinerary, float(r.p_b), float(r.p_a), float(r.daily_searches)))
            except ValueError as exc:
                raise TraceParseError(path, line_number, str(exc)) from exc
        logger.info(f"Read value table with {len(rows):,} itineraries from {path}")
        return cls(rows)
