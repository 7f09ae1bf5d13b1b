import logging
from dataclasses import dataclass, field
from typing import List, Optional

from core.errors import PlanAuditError
from scheduler.schedule import SchedulePlan

logger = logging.getLogger(__name__)


@dataclass
class PlanAuditReport:
    max_load: int
    capacity: int
    budget_used: int
    budget: int
    n_itineraries: int
    worst_gap: int = 0
    worst_gap_ttl: int = 0
    worst_gap_itinerary: Optional[str] = None
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary_lines(self) -> List[str]:
        lines = [
            f"per-second max load: {self.max_load} (capacity {self.capacity})",
            f"budget used: {self.budget_used:,} of {self.budget:,}",
            f"itineraries: {self.n_itineraries:,}",
        ]
        if self.worst_gap_itinerary is not None:
            lines.append(f"largest gap/ttl: {self.worst_gap} s vs ttl {self.worst_gap_ttl} s "
                         f"({self.worst_gap_itinerary})")
        lines.append(f"violations: {len(self.violations)}")
        lines.extend(f"  {v}" for v in self.violations[:20])
        return lines


def audit_plan(plan: SchedulePlan, enforce: bool = False) -> PlanAuditReport:
    """Check per-second capacity, gaps between consecutive sends (wrap-around included)
    and the number of sends of every planned itinerary."""
    loads = plan.loads()
    violations: List[str] = []

    for second in (loads > plan.capacity).nonzero()[0].tolist():
        violations.append(f"second {second}: load {int(loads[second])} > capacity {int(plan.capacity[second])}")

    times = plan.send_times()
    planned = {entry.itinerary: entry for entry in plan.entries}
    worst_ratio, worst = 0.0, (0, 0, None)
    for itinerary, entry in planned.items():
        seconds = sorted(times.get(itinerary, []))
        key = itinerary.key()
        if len(seconds) != entry.frequency:
            violations.append(f"itinerary {key}: {len(seconds)} sends, expected {entry.frequency}")
        if not seconds:
            continue
        gaps = [b - a for a, b in zip(seconds, seconds[1:])]
        gaps.append(plan.day - seconds[-1] + seconds[0])
        gap = max(gaps)
        limit = entry.max_gap
        if gap / limit > worst_ratio:
            worst_ratio, worst = gap / limit, (gap, limit, key)
        if gap > limit:
            violations.append(f"itinerary {key}: gap {gap} s > ttl {limit} s")
    for itinerary in times.keys() - planned.keys():
        violations.append(f"itinerary {itinerary.key()}: scheduled but not in the plan entries")

    report = PlanAuditReport(
        max_load=int(loads.max()) if len(loads) else 0,
        capacity=int(plan.capacity.max()) if len(plan.capacity) else 0,
        budget_used=int(loads.sum()),
        budget=plan.budget,
        n_itineraries=len(planned),
        worst_gap=worst[0],
        worst_gap_ttl=worst[1],
        worst_gap_itinerary=worst[2],
        violations=violations,
    )
    if violations:
        logger.warning(f"Plan audit found {len(violations)} violation(s); first: {violations[0]}")
    if enforce and violations:
        raise PlanAuditError(violations)
    return report
