import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from core.types import validate_probability
from smartttl.clustering import ClusterKey

logger = logging.getLogger(__name__)


class MissRatioCurve:
    """Empirical CDF of gap times: hit(ttl) is the fraction of gaps <= ttl."""

    def __init__(self, gaps: Sequence[int]):
        self.gaps = np.sort(np.asarray(gaps, dtype=np.int64))

    def __len__(self):
        return len(self.gaps)

    def __call__(self, ttl: float) -> float:
        return float(self.hit(np.asarray([ttl]))[0])

    def hit(self, ttls) -> np.ndarray:
        ttls = np.asarray(ttls)
        return np.searchsorted(self.gaps, ttls, side='right') / len(self.gaps)

    def miss(self, ttls) -> np.ndarray:
        return 1.0 - self.hit(ttls)


def miss_ratio_curve(gap_samples: Sequence[int]) -> MissRatioCurve:
    if len(gap_samples) == 0:
        raise ValueError("miss ratio curve needs at least one gap sample")
    return MissRatioCurve(gap_samples)


def accuracy_estimate(duration_samples: Sequence[int], ttl_assigned: float) -> float:
    """Mean of min(1, d / ttl) over price durations d."""
    if ttl_assigned <= 0:
        raise ValueError(f"ttl must be > 0, got {ttl_assigned}")
    if len(duration_samples) == 0:
        raise ValueError("accuracy estimate needs at least one duration sample")
    durations = np.asarray(duration_samples, dtype=float)
    return float(np.minimum(1.0, durations / ttl_assigned).mean())


def accuracy_curve(duration_samples: Sequence[int], ttls) -> np.ndarray:
    """``accuracy_estimate`` over many TTLs at once, using prefix sums of the sorted durations."""
    durations = np.sort(np.asarray(duration_samples, dtype=float))
    if len(durations) == 0:
        raise ValueError("accuracy estimate needs at least one duration sample")
    ttls = np.asarray(ttls, dtype=float)
    if (ttls <= 0).any():
        raise ValueError("all TTLs must be > 0")
    prefix = np.concatenate(([0.0], np.cumsum(durations)))
    shorter = np.searchsorted(durations, ttls, side='left')
    longer = len(durations) - shorter
    return (longer + prefix[shorter] / ttls) / len(durations)


@dataclass
class Cluster:
    key: ClusterKey
    duration_samples: List[int] = field(default_factory=list)
    gap_samples: List[int] = field(default_factory=list)
    assigned_ttl: Optional[int] = None
    inherited_from: Optional[ClusterKey] = None


def objective_curve(cluster: Cluster, p_b_mean: float, ttl_grid: Sequence[int]) -> np.ndarray:
    """Expected bookings per search in the cluster for every TTL on the grid."""
    validate_probability(p_b_mean, "p_b_mean")
    hit = miss_ratio_curve(cluster.gap_samples).hit(ttl_grid)
    accuracy = accuracy_curve(cluster.duration_samples, ttl_grid)
    return hit * p_b_mean * accuracy


def assign_ttl(cluster: Cluster, p_b_mean: float, ttl_grid: Sequence[int]) -> int:
    """Grid TTL maximizing hit(ttl) * p_b_mean * accuracy(ttl); ties go to the smaller TTL."""
    if len(ttl_grid) == 0:
        raise ValueError("TTL grid is empty")
    grid = np.unique(np.asarray(ttl_grid, dtype=np.int64))
    objective = objective_curve(cluster, p_b_mean, grid)
    # np.unique sorts ascending and argmax returns the first maximum
    ttl = int(grid[int(np.argmax(objective))])
    cluster.assigned_ttl = ttl
    return ttl
