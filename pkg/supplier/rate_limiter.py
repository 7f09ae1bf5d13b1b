import logging
from array import array
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import UnknownDataCentreError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['dc_id', 'second', 'accepted', 'rejected']


class RateLimiter:
    """Fixed one-second windows with a per-DC budget and a shared total cap.

    Only ``try_acquire`` changes the counters, and a refused request leaves the
    accepted counts untouched (it is only tallied as rejected for reporting).
    """

    def __init__(self, qps_limit: int, per_dc_allocation: Sequence[int]):
        if qps_limit <= 0:
            raise ValueError(f"qps_limit must be > 0, got {qps_limit}")
        if any(a < 0 for a in per_dc_allocation) or sum(per_dc_allocation) > qps_limit:
            raise ValueError(f"per-DC allocation {list(per_dc_allocation)} must be >= 0 and sum to <= {qps_limit}")
        self.qps_limit = qps_limit
        self.allocation = list(per_dc_allocation)
        n = len(self.allocation)

        self._window_second: Optional[int] = None
        self._window_accepted = [0] * n
        self._window_rejected = [0] * n
        self._window_total = 0

        # closed windows, one row per (second, dc) with activity
        self._seconds = array('q')
        self._dcs = array('q')
        self._accepted = array('q')
        self._rejected = array('q')

        self.accepted_total = 0
        self.rejected_total = 0

    @property
    def n_datacentres(self) -> int:
        return len(self.allocation)

    def _check_dc(self, dc_id: int):
        if not 0 <= dc_id < len(self.allocation):
            raise UnknownDataCentreError(dc_id, len(self.allocation))

    def _roll(self, now: int):
        if self._window_second is not None and now < self._window_second:
            raise ValueError(f"Limiter time went backwards: {now} < {self._window_second}")
        if now == self._window_second:
            return
        self._flush()
        self._window_second = now

    def _flush(self):
        if self._window_second is None:
            return
        for dc, (acc, rej) in enumerate(zip(self._window_accepted, self._window_rejected)):
            if acc or rej:
                self._seconds.append(self._window_second)
                self._dcs.append(dc)
                self._accepted.append(acc)
                self._rejected.append(rej)
        n = len(self.allocation)
        self._window_accepted = [0] * n
        self._window_rejected = [0] * n
        self._window_total = 0

    def remaining(self, dc_id: int, now: int) -> int:
        self._check_dc(dc_id)
        if now != self._window_second:
            return min(self.allocation[dc_id], self.qps_limit)
        return max(0, min(self.allocation[dc_id] - self._window_accepted[dc_id],
                          self.qps_limit - self._window_total))

    def remaining_total(self, now: int) -> int:
        if now != self._window_second:
            return min(self.qps_limit, sum(self.allocation))
        per_dc = sum(max(0, a - acc) for a, acc in zip(self.allocation, self._window_accepted))
        return max(0, min(self.qps_limit - self._window_total, per_dc))

    def try_acquire(self, dc_id: int, now: int) -> bool:
        self._check_dc(dc_id)
        self._roll(now)
        if (self._window_accepted[dc_id] < self.allocation[dc_id]
                and self._window_total < self.qps_limit):
            self._window_accepted[dc_id] += 1
            self._window_total += 1
            self.accepted_total += 1
            return True
        self._window_rejected[dc_id] += 1
        self.rejected_total += 1
        return False

    def _columns(self) -> Dict[str, np.ndarray]:
        seconds, dcs = list(self._seconds), list(self._dcs)
        accepted, rejected = list(self._accepted), list(self._rejected)
        if self._window_second is not None:
            for dc, (acc, rej) in enumerate(zip(self._window_accepted, self._window_rejected)):
                if acc or rej:
                    seconds.append(self._window_second)
                    dcs.append(dc)
                    accepted.append(acc)
                    rejected.append(rej)
        return {
            'dc_id': np.array(dcs, dtype=np.int64),
            'second': np.array(seconds, dtype=np.int64),
            'accepted': np.array(accepted, dtype=np.int64),
            'rejected': np.array(rejected, dtype=np.int64),
        }

    def utilization_report(self, horizon: Optional[int] = None) -> pd.DataFrame:
        """Per-DC, per-second accepted/rejected counts.

        Without a horizon only seconds with activity appear; with one, every
        (dc, second) pair in [0, horizon) is present and idle seconds are zero.
        """
        df = pd.DataFrame(self._columns(), columns=REPORT_COLUMNS)
        if horizon is not None:
            index = pd.MultiIndex.from_product([range(len(self.allocation)), range(horizon)],
                                               names=['dc_id', 'second'])
            df = (df.set_index(['dc_id', 'second'])
                  .reindex(index, fill_value=0)
                  .reset_index())
        return df.sort_values(['second', 'dc_id'], kind='stable').reset_index(drop=True)

    def per_second_totals(self) -> pd.Series:
        cols = self._columns()
        df = pd.DataFrame({'second': cols['second'], 'accepted': cols['accepted']})
        return df.groupby('second')['accepted'].sum()

    def audit(self) -> List[str]:
        """Seconds where the recorded counts break the per-DC or the total cap."""
        cols = self._columns()
        violations = []
        if len(cols['second']) == 0:
            return violations
        allocation = np.array(self.allocation)
        over_dc = cols['accepted'] > allocation[cols['dc_id']]
        for second, dc, acc in zip(cols['second'][over_dc], cols['dc_id'][over_dc], cols['accepted'][over_dc]):
            violations.append(f"second {second}: DC {dc} accepted {acc} > allocation {allocation[dc]}")
        totals = self.per_second_totals()
        for second, total in totals[totals > self.qps_limit].items():
            violations.append(f"second {second}: total accepted {total} > qps limit {self.qps_limit}")
        return violations
