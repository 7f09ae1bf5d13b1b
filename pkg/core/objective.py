import math
from typing import Iterable, Tuple

from core.types import validate_probability


def expected_bookings(searches: Iterable[Tuple[float, float, float]]) -> float:
    """Sum of P_D * P_B * P_A over searches."""
    terms = []
    for p_d, p_b, p_a in searches:
        validate_probability(p_d, "p_d")
        validate_probability(p_b, "p_b")
        validate_probability(p_a, "p_a")
        terms.append(p_d * p_b * p_a)
    return math.fsum(terms)
