from datetime import timedelta

from config.settings import SimulationConfig
from core.types import FetchRecord, Itinerary, SearchCriteria, UserSearch

START = SimulationConfig.START_DATE
DAY = SimulationConfig.SECONDS_PER_DAY


def make_itinerary(hotel: int = 0, lead: int = 30, nights: int = 1, adults: int = 2) -> Itinerary:
    """Itinerary whose check-in is ``lead`` days after the simulation start date."""
    checkin = START + timedelta(days=lead)
    return Itinerary(f"H{hotel:05d}", SearchCriteria(checkin, checkin + timedelta(days=nights), adults))


def make_search(itinerary: Itinerary, t: int, user: str = 'U0000001', dc_id: int = 0) -> UserSearch:
    return UserSearch(user, itinerary, t, dc_id)


def fetches(itinerary: Itinerary, points) -> list:
    """(timestamp, price[, available]) tuples -> fetch records."""
    return [FetchRecord(itinerary, p[0], p[1], p[2] if len(p) > 2 else True) for p in points]
