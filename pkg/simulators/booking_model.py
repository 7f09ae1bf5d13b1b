import logging
from typing import Dict

import numpy as np

from core.types import Itinerary

logger = logging.getLogger(__name__)


class BookingModel:
    """Ground-truth booking-attempt propensity per itinerary.

    p_b is a Beta(alpha, beta) draw keyed by the itinerary digest, so any itinerary,
    generated or ingested, gets the same propensity for the same seed.
    """

    def __init__(self, alpha: float = 2.0, beta: float = 30.0, seed: int = 0):
        if alpha <= 0 or beta <= 0:
            raise ValueError(f"Beta parameters must be positive, got alpha={alpha}, beta={beta}")
        self.alpha = alpha
        self.beta = beta
        self.seed = seed
        self._cache: Dict[Itinerary, float] = {}

        logger.debug(f"BookingModel configured - Beta({alpha}, {beta}), mean p_b {self.mean:.3f}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def p_b(self, itinerary: Itinerary) -> float:
        value = self._cache.get(itinerary)
        if value is None:
            rng = np.random.default_rng([self.seed, itinerary.digest()])
            value = float(rng.beta(self.alpha, self.beta))
            self._cache[itinerary] = value
        return value
