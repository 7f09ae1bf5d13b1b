import logging
import os
from dataclasses import dataclass
from datetime import date
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import pandas as pd

from config.settings import TTLConfig
from core.errors import TraceParseError
from core.types import FetchRecord, Itinerary
from smartttl.assignment import Cluster, accuracy_estimate, assign_ttl, miss_ratio_curve
from smartttl.clustering import ClusterKey, cluster, gap_samples
from smartttl.extraction import extract_durations

logger = logging.getLogger(__name__)

TTL_TABLE_COLUMNS = ['checkin_lead', 'available', 'ttl_seconds', 'n_duration_samples', 'n_gap_samples']


@dataclass(frozen=True)
class TtlRow:
    key: ClusterKey
    ttl_seconds: int
    n_duration_samples: int
    n_gap_samples: int
    inherited_from: Optional[ClusterKey] = None
    hit: Optional[float] = None
    accuracy: Optional[float] = None
    p_b_mean: Optional[float] = None

    @property
    def objective(self) -> Optional[float]:
        if self.hit is None or self.accuracy is None or self.p_b_mean is None:
            return None
        return self.hit * self.p_b_mean * self.accuracy


class TtlTable:
    """Per-cluster TTLs. Immutable once built.

    ``lookup`` of a key without a row falls back to the nearest lead with the same
    availability, then to the default TTL.
    """

    def __init__(self, rows: Iterable[TtlRow], default_ttl: int = TTLConfig.DEFAULT_TTL_SECONDS,
                 lead_cap: int = TTLConfig.LEAD_CAP_DAYS, start_date: Optional[date] = None):
        if default_ttl <= 0:
            raise ValueError(f"default ttl must be > 0, got {default_ttl}")
        self._rows: Dict[ClusterKey, TtlRow] = {row.key: row for row in sorted(rows, key=lambda r: r.key)}
        self.default_ttl = default_ttl
        self.lead_cap = lead_cap
        self.start_date = start_date
        self._leads = {
            flag: sorted(k.checkin_lead for k in self._rows if k.available == flag) for flag in (True, False)
        }

    def __len__(self):
        return len(self._rows)

    def __contains__(self, key: ClusterKey) -> bool:
        return key in self._rows

    @property
    def rows(self) -> List[TtlRow]:
        return list(self._rows.values())

    def lookup(self, key: ClusterKey) -> int:
        row = self._rows.get(key)
        if row is not None:
            return row.ttl_seconds
        leads = self._leads[key.available]
        if not leads:
            return self.default_ttl
        # nearest lead, the smaller one on a tie
        nearest = min(leads, key=lambda lead: (abs(lead - key.checkin_lead), lead))
        return self._rows[ClusterKey(nearest, key.available)].ttl_seconds

    def ttl_for(self, itinerary: Itinerary, now: int, available: bool = True) -> int:
        return self.lookup(cluster(itinerary, now, available, self.lead_cap, self.start_date))

    def objective_summary(self) -> pd.DataFrame:
        records = [{
            'checkin_lead': row.key.checkin_lead,
            'available': int(row.key.available),
            'ttl_seconds': row.ttl_seconds,
            'hit': row.hit,
            'accuracy': row.accuracy,
            'p_b_mean': row.p_b_mean,
            'objective': row.objective,
            'inherited_from': None if row.inherited_from is None else row.inherited_from.checkin_lead,
        } for row in self._rows.values()]
        return pd.DataFrame(records, columns=['checkin_lead', 'available', 'ttl_seconds', 'hit', 'accuracy',
                                              'p_b_mean', 'objective', 'inherited_from'])

    def to_frame(self) -> pd.DataFrame:
        records = [(row.key.checkin_lead, int(row.key.available), row.ttl_seconds,
                    row.n_duration_samples, row.n_gap_samples) for row in self._rows.values()]
        return pd.DataFrame(records, columns=TTL_TABLE_COLUMNS)

    def write_csv(self, path: str):
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator='\n')
        logger.info(f"Wrote TTL table with {len(self._rows)} clusters to {path}")

    @classmethod
    def read_csv(cls, path: str, default_ttl: int = TTLConfig.DEFAULT_TTL_SECONDS,
                 start_date: Optional[date] = None) -> "TtlTable":
        if not os.path.exists(path):
            raise FileNotFoundError(f"TTL table not found: {path}")
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
        missing = [c for c in TTL_TABLE_COLUMNS if c not in df.columns]
        if missing:
            raise TraceParseError(path, 1, f"missing columns: {', '.join(missing)}")
        rows = []
        for line_number, r in enumerate(df.itertuples(index=False), start=2):
            try:
                ttl = int(r.ttl_seconds)
                if ttl <= 0:
                    raise ValueError(f"ttl_seconds must be > 0, got {ttl}")
                rows.append(TtlRow(
                    key=ClusterKey(int(r.checkin_lead), r.available.strip().lower() in ('1', 'true')),
                    ttl_seconds=ttl,
                    n_duration_samples=int(r.n_duration_samples),
                    n_gap_samples=int(r.n_gap_samples),
                ))
            except ValueError as exc:
                raise TraceParseError(path, line_number, str(exc)) from exc
        logger.info(f"Read TTL table with {len(rows)} clusters from {path}")
        return cls(rows, default_ttl=default_ttl, start_date=start_date)


def build_ttl_table(fetch_log: Sequence[FetchRecord],
                    searches: Optional[Iterable] = None,
                    p_b_means: Optional[Mapping[ClusterKey, float]] = None,
                    global_p_b: float = 1.0,
                    ttl_grid: Optional[Sequence[int]] = None,
                    min_samples: int = TTLConfig.MIN_DURATION_SAMPLES,
                    emit_censored: bool = TTLConfig.EMIT_CENSORED,
                    default_ttl: int = TTLConfig.DEFAULT_TTL_SECONDS,
                    lead_cap: int = TTLConfig.LEAD_CAP_DAYS,
                    start_date: Optional[date] = None) -> TtlTable:
    """Extract durations, cluster them, pool gaps and assign one TTL per cluster.

    Gaps come from ``searches`` when given, otherwise from the fetch timestamps. Gaps are
    pooled by lead and shared by both availability clusters of that lead. A cluster with
    fewer than ``min_samples`` durations (or no gaps) inherits the TTL of the nearest
    self-sufficient lead with the same availability, else the default TTL.
    """
    fetch_log = list(fetch_log)
    durations = extract_durations(fetch_log, emit_censored)
    if not durations:
        raise ValueError("no duration samples")
    ttl_grid = list(ttl_grid) if ttl_grid is not None else TTLConfig.ttl_grid()
    p_b_means = p_b_means or {}

    clusters: Dict[ClusterKey, Cluster] = {}
    past_checkin = 0
    for sample in durations:
        try:
            key = cluster(sample.itinerary, sample.observed_at, sample.available, lead_cap, start_date)
        except ValueError:
            past_checkin += 1
            continue
        clusters.setdefault(key, Cluster(key)).duration_samples.append(sample.duration)
    if past_checkin:
        logger.warning(f"Skipped {past_checkin:,} duration samples observed after check-in")
    if not clusters:
        raise ValueError("no duration samples")

    gaps_by_lead = gap_samples(searches if searches is not None else fetch_log, lead_cap, start_date)
    for key, c in clusters.items():
        c.gap_samples = gaps_by_lead.get(key.checkin_lead, [])

    rows: Dict[ClusterKey, TtlRow] = {}
    for key in sorted(clusters):
        c = clusters[key]
        if len(c.duration_samples) < min_samples or not c.gap_samples:
            continue
        p_b = p_b_means.get(key, global_p_b)
        ttl = assign_ttl(c, p_b, ttl_grid)
        rows[key] = TtlRow(key, ttl, len(c.duration_samples), len(c.gap_samples),
                           hit=miss_ratio_curve(c.gap_samples)(ttl),
                           accuracy=accuracy_estimate(c.duration_samples, ttl),
                           p_b_mean=p_b)

    sufficient = {flag: sorted(k.checkin_lead for k in rows if k.available == flag) for flag in (True, False)}
    inherited = 0
    for key in sorted(clusters):
        if key in rows:
            continue
        c = clusters[key]
        leads = sufficient[key.available]
        if leads:
            nearest = min(leads, key=lambda lead: (abs(lead - key.checkin_lead), lead))
            source = ClusterKey(nearest, key.available)
            ttl = rows[source].ttl_seconds
        else:
            source, ttl = None, default_ttl
        c.assigned_ttl, c.inherited_from = ttl, source
        rows[key] = TtlRow(key, ttl, len(c.duration_samples), len(c.gap_samples), inherited_from=source)
        inherited += 1

    logger.info(f"Assigned TTLs to {len(rows)} clusters ({inherited} inherited) "
                f"over a grid of {len(ttl_grid)} candidates")
    return TtlTable(rows.values(), default_ttl=default_ttl, lead_cap=lead_cap, start_date=start_date)
