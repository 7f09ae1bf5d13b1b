import hashlib
from dataclasses import dataclass, replace
from datetime import date, timedelta
from typing import Dict, Optional

from config.settings import ItineraryConfig, SimulationConfig


def stable_hash(*parts) -> int:
    # Python's hash() is salted per process; seeds and user splits must not be.
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "big")


def simulation_date(timestamp: int, start_date: Optional[date] = None) -> date:
    start_date = start_date or SimulationConfig.START_DATE
    return start_date + timedelta(days=timestamp // SimulationConfig.SECONDS_PER_DAY)


def validate_probability(value: float, name: str = "probability") -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be within [0, 1], got {value}")
    return value


@dataclass(frozen=True, slots=True)
class SearchCriteria:
    checkin: date
    checkout: date
    adults: int = 2
    children: int = 0
    rooms: int = 1

    def __post_init__(self):
        if self.checkout <= self.checkin:
            raise ValueError(f"checkout {self.checkout} must be after checkin {self.checkin}")
        if not 1 <= self.adults <= ItineraryConfig.MAX_ADULTS:
            raise ValueError(f"adults must be within 1..{ItineraryConfig.MAX_ADULTS}, got {self.adults}")
        if not 0 <= self.children <= ItineraryConfig.MAX_CHILDREN:
            raise ValueError(f"children must be within 0..{ItineraryConfig.MAX_CHILDREN}, got {self.children}")
        if not 1 <= self.rooms <= ItineraryConfig.MAX_ROOMS:
            raise ValueError(f"rooms must be within 1..{ItineraryConfig.MAX_ROOMS}, got {self.rooms}")

    @property
    def nights(self) -> int:
        return (self.checkout - self.checkin).days


@dataclass(frozen=True, slots=True)
class Itinerary:
    """A hotel priced under one set of search criteria; the unit a supplier request covers."""

    hotel_id: str
    criteria: SearchCriteria

    ROW_FIELDS = ('hotel_id', 'checkin', 'checkout', 'adults', 'children', 'rooms')

    @classmethod
    def from_fields(cls, hotel_id, checkin, checkout, adults, children, rooms) -> "Itinerary":
        if isinstance(checkin, str):
            checkin = date.fromisoformat(checkin)
        if isinstance(checkout, str):
            checkout = date.fromisoformat(checkout)
        return cls(str(hotel_id), SearchCriteria(checkin, checkout, int(adults), int(children), int(rooms)))

    def to_fields(self) -> Dict[str, object]:
        c = self.criteria
        return {
            'hotel_id': self.hotel_id,
            'checkin': c.checkin.isoformat(),
            'checkout': c.checkout.isoformat(),
            'adults': c.adults,
            'children': c.children,
            'rooms': c.rooms,
        }

    def key(self) -> str:
        c = self.criteria
        return f"{self.hotel_id}|{c.checkin.isoformat()}|{c.checkout.isoformat()}|{c.adults}|{c.children}|{c.rooms}"

    def digest(self) -> int:
        return stable_hash(self.key())

    def lead_days(self, timestamp: int, start_date: Optional[date] = None) -> int:
        return (self.criteria.checkin - simulation_date(timestamp, start_date)).days


@dataclass(frozen=True, slots=True)
class UserSearch:
    user_id: str
    itinerary: Itinerary
    timestamp: int
    dc_id: int = 0


@dataclass(frozen=True, slots=True)
class FetchRecord:
    """One supplier response as seen by the fetch log."""

    itinerary: Itinerary
    timestamp: int
    price: int
    available: bool = True


@dataclass(frozen=True, slots=True)
class PriceQuote:
    """A supplier price for an itinerary.

    ``ttl`` is None while the quote travels from the supplier to the policy that assigns it;
    only quotes with a positive TTL are stored.
    """

    itinerary: Itinerary
    price: int
    fetched_at: int
    ttl: Optional[int] = None
    available: bool = True

    @property
    def expires_at(self) -> int:
        if self.ttl is None:
            return self.fetched_at
        return self.fetched_at + self.ttl

    def is_live(self, now: int) -> bool:
        return self.ttl is not None and self.fetched_at <= now < self.fetched_at + self.ttl

    def with_ttl(self, ttl: int) -> "PriceQuote":
        if ttl is None or ttl <= 0:
            raise ValueError(f"ttl must be a positive number of seconds, got {ttl}")
        return replace(self, ttl=int(ttl))

