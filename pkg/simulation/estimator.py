import logging
from dataclasses import dataclass
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

from config.settings import EstimatorConfig, SimulationConfig
from core.types import Itinerary, UserSearch
from scheduler.value_table import ValueRow, ValueTable
from simulation.engine import Observations, SimulationEngine
from simulation.policies import PASSIVE_FIXED_TTL, PolicySpec
from simulators.booking_model import BookingModel
from simulators.price_process import PriceProcess
from smartttl.assignment import accuracy_estimate
from smartttl.clustering import ClusterKey, cluster
from smartttl.extraction import extract_durations
from smartttl.ttl_table import TtlTable, build_ttl_table
from supplier.supplier import SupplierConfig

logger = logging.getLogger(__name__)


@dataclass
class ProbabilityEstimate:
    value_table: ValueTable
    p_b_by_cluster: Dict[ClusterKey, float]
    global_p_b: float

    def p_b(self, itinerary: Itinerary, key: Optional[ClusterKey] = None) -> float:
        """Estimated p_b; unseen itineraries get their cluster mean, then the global mean."""
        row = self.value_table.get(itinerary)
        if row is not None:
            return row.p_b
        if key is not None and key in self.p_b_by_cluster:
            return self.p_b_by_cluster[key]
        return self.global_p_b


@dataclass
class TrainedModel:
    ttl_table: TtlTable
    probabilities: ProbabilityEstimate
    observations: Observations

    @property
    def value_table(self) -> ValueTable:
        return self.probabilities.value_table


def smoothed_p_b(attempts: int, served: int, prior: float,
                 weight: float = EstimatorConfig.P_B_SMOOTHING_WEIGHT) -> float:
    """Attempt rate shrunk toward ``prior`` with ``weight`` pseudo-searches."""
    if served + weight == 0:
        return prior
    return (attempts + weight * prior) / (served + weight)


def training_supplier(training_trace: Sequence[UserSearch],
                      qps_limit: int = EstimatorConfig.TRAINING_QPS_LIMIT) -> SupplierConfig:
    n_datacentres = max((s.dc_id for s in training_trace), default=0) + 1
    return SupplierConfig(max(qps_limit, n_datacentres), n_datacentres)


def replay_training(training_trace: Sequence[UserSearch], price_process: PriceProcess, seed: int,
                    booking_model: Optional[BookingModel] = None,
                    supplier_config: Optional[SupplierConfig] = None,
                    ttl: int = EstimatorConfig.TRAINING_TTL_SECONDS) -> Observations:
    """Passive fixed-TTL replay of the training trace, recording what it observed."""
    supplier_config = supplier_config or training_supplier(training_trace)
    engine = SimulationEngine(supplier_config, PolicySpec(PASSIVE_FIXED_TTL, ttl=ttl), price_process, seed,
                              booking_model=booking_model, arm='training', record_observations=True)
    engine.run(training_trace)
    return engine.observations


def cluster_p_b_means(observations: Observations) -> Tuple[Dict[ClusterKey, float], float]:
    served = sum(observations.served_by_cluster.values())
    attempts = sum(observations.attempts_by_cluster.values())
    global_p_b = attempts / served if served else 0.0
    means = {key: observations.attempts_by_cluster[key] / n
             for key, n in sorted(observations.served_by_cluster.items()) if n}
    return means, global_p_b


def _durations_by_cluster(observations: Observations, start_date: date) -> Dict[ClusterKey, List[int]]:
    grouped: Dict[ClusterKey, List[int]] = {}
    for sample in extract_durations(observations.fetch_log):
        try:
            key = cluster(sample.itinerary, sample.observed_at, sample.available, start_date=start_date)
        except ValueError:
            continue
        grouped.setdefault(key, []).append(sample.duration)
    return grouped


def estimate_probabilities(training_trace: Sequence[UserSearch], price_process: PriceProcess, seed: int,
                           booking_model: Optional[BookingModel] = None,
                           ttl_table: Optional[TtlTable] = None,
                           observations: Optional[Observations] = None) -> ProbabilityEstimate:
    """Per-itinerary p_b and p_a from a training replay.

    p_b is the smoothed attempt rate over served searches; p_a is the accuracy estimate of
    the itinerary's cluster durations at the TTL the table assigns to that cluster.
    """
    training_trace = list(training_trace)
    if observations is None:
        observations = replay_training(training_trace, price_process, seed, booking_model)
    means, global_p_b = cluster_p_b_means(observations)
    if ttl_table is None:
        ttl_table = TtlTable([], start_date=price_process.config.start_date)

    durations = _durations_by_cluster(observations, price_process.config.start_date)
    pooled = [d for samples in durations.values() for d in samples]
    training_days = max(observations.horizon, 1) / SimulationConfig.SECONDS_PER_DAY
    accuracy_memo: Dict[ClusterKey, float] = {}

    rows = []
    for itinerary, n_searches in observations.searches.items():
        key = observations.last_cluster[itinerary]
        prior = means.get(key, global_p_b)
        p_b = smoothed_p_b(observations.attempts[itinerary], observations.served[itinerary], prior)
        if key not in accuracy_memo:
            samples = durations.get(key) or pooled
            accuracy_memo[key] = accuracy_estimate(samples, ttl_table.lookup(key)) if samples else 1.0
        rows.append(ValueRow(itinerary, p_b, accuracy_memo[key], n_searches / training_days))

    logger.info(f"Estimated p_b/p_a for {len(rows):,} itineraries over {len(means)} clusters, "
                f"global p_b {global_p_b:.4f}")
    return ProbabilityEstimate(ValueTable(rows), means, global_p_b)


def train_model(training_trace: Sequence[UserSearch], price_process: PriceProcess, seed: int,
                booking_model: Optional[BookingModel] = None,
                supplier_config: Optional[SupplierConfig] = None,
                ttl: int = EstimatorConfig.TRAINING_TTL_SECONDS) -> TrainedModel:
    """Replay the training trace, then build the TTL table and the probability table from it."""
    training_trace = list(training_trace)
    if not training_trace:
        raise ValueError("training trace is empty")
    observations = replay_training(training_trace, price_process, seed, booking_model, supplier_config, ttl)
    means, global_p_b = cluster_p_b_means(observations)
    start_date = price_process.config.start_date
    try:
        ttl_table = build_ttl_table(observations.fetch_log, training_trace, means, global_p_b,
                                    start_date=start_date)
    except ValueError as exc:
        if str(exc) != "no duration samples":
            raise
        logger.warning("Training saw no price changes; every cluster gets the default TTL")
        ttl_table = TtlTable([], start_date=start_date)
    probabilities = estimate_probabilities(training_trace, price_process, seed, booking_model,
                                           ttl_table=ttl_table, observations=observations)
    return TrainedModel(ttl_table, probabilities, observations)
