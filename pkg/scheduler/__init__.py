from .audit import PlanAuditReport, audit_plan
from .lru_refresher import lru_refresh_batch
from .planning import (ItineraryPlanEntry, build_plan_entries, itinerary_frequency, itinerary_value,
                       select_top_requests)
from .schedule import SchedulePlan, build_schedule, read_plan_csv
from .value_table import ValueRow, ValueTable

__all__ = [
    'PlanAuditReport', 'audit_plan', 'lru_refresh_batch', 'ItineraryPlanEntry', 'build_plan_entries',
    'itinerary_frequency', 'itinerary_value', 'select_top_requests', 'SchedulePlan', 'build_schedule',
    'read_plan_csv', 'ValueRow', 'ValueTable',
]
