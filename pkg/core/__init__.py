from .errors import ConfigError, PlanAuditError, ScheduleCapacityError, TraceParseError, UnknownDataCentreError
from .objective import expected_bookings
from .types import Itinerary, PriceQuote, SearchCriteria, UserSearch

__all__ = [
    'SearchCriteria', 'Itinerary', 'UserSearch', 'PriceQuote',
    'expected_bookings',
    'ConfigError', 'TraceParseError', 'ScheduleCapacityError', 'PlanAuditError', 'UnknownDataCentreError',
]
