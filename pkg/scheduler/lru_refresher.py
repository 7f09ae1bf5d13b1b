from typing import List

from cache.lru_cache import LruSearchCache
from core.types import Itinerary


def lru_refresh_batch(lru_cache: LruSearchCache, mu: int, mu_passive_this_second: int,
                      now: int) -> List[Itinerary]:
    """Itineraries to refresh with the budget passive traffic left this second."""
    if not 0 <= mu_passive_this_second <= mu:
        raise ValueError(f"passive usage {mu_passive_this_second} must be within 0..{mu}")
    return lru_cache.pull_expiring(now, mu - mu_passive_this_second)
