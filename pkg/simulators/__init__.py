from .booking_model import BookingModel
from .distributions import DistributionSpec
from .price_process import PriceProcess, PriceProcessConfig, PriceTimeline, generate_price_timeline
from .search_generator import SearchGenerator, WorkloadConfig, generate_searches
from .traffic_profile import TrafficProfile

__all__ = [
    'BookingModel', 'DistributionSpec', 'PriceProcess', 'PriceProcessConfig', 'PriceTimeline',
    'generate_price_timeline', 'SearchGenerator', 'WorkloadConfig', 'generate_searches', 'TrafficProfile',
]
