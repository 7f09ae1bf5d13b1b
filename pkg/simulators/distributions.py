import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.errors import ConfigError

logger = logging.getLogger(__name__)

KINDS = ('fixed', 'exponential', 'lognormal', 'empirical', 'constant')


@dataclass(frozen=True)
class DistributionSpec:
    """Parametric description of a positive duration in seconds.

    Text form (used in config files):
        fixed:1860
        exponential:3600              (mean)
        lognormal:3600:0.8            (median, sigma)
        empirical:300=0.8,7200=0,86400=0.2   (upper bin edge = weight; uniform within a bin)
        constant                      (never ends)
    """

    kind: str
    params: Tuple[float, ...] = ()
    bins: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"Distribution '{self.kind}' is not valid. Options: {list(KINDS)}")
        if self.kind in ('fixed', 'exponential') and (len(self.params) != 1 or self.params[0] <= 0):
            raise ConfigError(f"{self.kind} needs one positive parameter, got {self.params}")
        if self.kind == 'lognormal' and (len(self.params) != 2 or self.params[0] <= 0 or self.params[1] < 0):
            raise ConfigError(f"lognormal needs a positive median and a nonnegative sigma, got {self.params}")
        if self.kind == 'empirical':
            if not self.bins:
                raise ConfigError("empirical distribution needs at least one bin")
            edges = [edge for edge, _ in self.bins]
            if edges != sorted(edges) or edges[0] <= 0 or len(set(edges)) != len(edges):
                raise ConfigError(f"empirical bin edges must be positive and increasing, got {edges}")
            weights = [w for _, w in self.bins]
            if min(weights) < 0 or sum(weights) <= 0:
                raise ConfigError(f"empirical weights must be nonnegative with a positive sum, got {weights}")

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        text = text.strip()
        kind, _, rest = text.partition(':')
        kind = kind.strip().lower()
        try:
            if kind == 'constant':
                return cls('constant')
            if kind == 'empirical':
                bins = []
                for part in rest.split(','):
                    edge, _, weight = part.partition('=')
                    bins.append((float(edge), float(weight)))
                return cls('empirical', bins=tuple(bins))
            params = tuple(float(p) for p in rest.split(':')) if rest else ()
        except ValueError as exc:
            raise ConfigError(f"Cannot parse distribution '{text}': {exc}") from exc
        return cls(kind, params)

    def to_text(self) -> str:
        if self.kind == 'constant':
            return 'constant'
        if self.kind == 'empirical':
            return 'empirical:' + ','.join(f"{edge:g}={weight:g}" for edge, weight in self.bins)
        return self.kind + ':' + ':'.join(f"{p:g}" for p in self.params)

    @property
    def is_infinite(self) -> bool:
        return self.kind == 'constant'

    def mean(self) -> float:
        if self.kind == 'constant':
            return math.inf
        if self.kind in ('fixed', 'exponential'):
            return self.params[0]
        if self.kind == 'lognormal':
            median, sigma = self.params
            return median * math.exp(sigma ** 2 / 2)
        total = sum(w for _, w in self.bins)
        lower, acc = 0.0, 0.0
        for edge, weight in self.bins:
            acc += weight * (lower + edge) / 2
            lower = edge
        return acc / total

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` durations as whole seconds (>= 1). ``constant`` yields -1 (no end)."""
        if self.kind == 'constant':
            return np.full(size, -1, dtype=np.int64)
        if self.kind == 'fixed':
            raw = np.full(size, self.params[0], dtype=float)
        elif self.kind == 'exponential':
            raw = rng.exponential(self.params[0], size)
        elif self.kind == 'lognormal':
            median, sigma = self.params
            raw = rng.lognormal(math.log(median), sigma, size)
        else:
            edges = np.array([edge for edge, _ in self.bins], dtype=float)
            lowers = np.concatenate(([0.0], edges[:-1]))
            weights = np.array([w for _, w in self.bins], dtype=float)
            chosen = rng.choice(len(edges), size=size, p=weights / weights.sum())
            # 1 - u lies in (0, 1], so each draw falls in (lower, upper]
            u = 1.0 - rng.random(size)
            raw = lowers[chosen] + (edges[chosen] - lowers[chosen]) * u
        return np.maximum(np.ceil(raw), 1).astype(np.int64)
