from typing import List, Optional


class ConfigError(ValueError):
    pass


class UnknownDataCentreError(ValueError):
    def __init__(self, dc_id: int, n_datacentres: int):
        self.dc_id = dc_id
        super().__init__(f"Unknown data centre {dc_id} (configured: 0..{n_datacentres - 1})")


class TraceParseError(ValueError):
    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")


class ScheduleCapacityError(ValueError):
    def __init__(self, second: int, load: int, capacity: int, itinerary_key: Optional[str] = None):
        self.second = second
        self.load = load
        self.capacity = capacity
        self.itinerary_key = itinerary_key
        detail = f" while placing {itinerary_key}" if itinerary_key else ""
        super().__init__(f"Second {second} would carry {load} sends, capacity is {capacity}{detail}")


class PlanAuditError(ValueError):
    def __init__(self, violations: List[str]):
        self.violations = violations
        head = "; ".join(violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"Plan audit failed: {head}{more}")
