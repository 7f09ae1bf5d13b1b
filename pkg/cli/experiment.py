import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from config.loader import load_config_file, section
from config.settings import ExperimentDefaults, SimulationConfig
from core.errors import ConfigError
from core.types import UserSearch, stable_hash
from ingestion.trace_reader import ingest_trace
from simulation.estimator import TrainedModel, train_model
from simulation.policies import PolicySpec
from simulators.booking_model import BookingModel
from simulators.price_process import PriceProcess, PriceProcessConfig
from simulators.search_generator import WorkloadConfig, generate_searches
from supplier.supplier import SupplierConfig

logger = logging.getLogger(__name__)

DEFAULT_POLICIES = ('passive_fixed_ttl:900', 'passive_smart_ttl', 'aggressive_lru:5000',
                    'aggressive_smart_scheduler')
DEFAULT_ARMS = ('passive_smart_ttl', 'aggressive_smart_scheduler')

TRAINING_STREAM = 1


def _parse_policies(text: str) -> Tuple[PolicySpec, ...]:
    return tuple(PolicySpec.parse(p) for p in text.split(';') if p.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one `run`, `ab` or `estimate` invocation needs.

    File keys (prefix EXPERIMENT_): TRACE, TRAINING_TRACE, POLICIES (';'-separated),
    ARM_A, ARM_B, SEEDS (comma-separated), OUTPUT_DIR, HORIZON_DAYS, WORKERS.
    Workload, price and supplier sections use the WORKLOAD_, PRICE_ and SUPPLIER_ prefixes.
    """

    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    prices: PriceProcessConfig = field(default_factory=PriceProcessConfig)
    supplier: SupplierConfig = field(default_factory=SupplierConfig)
    trace_path: Optional[str] = None
    training_trace_path: Optional[str] = None
    policies: Tuple[PolicySpec, ...] = field(default_factory=lambda: tuple(PolicySpec.parse(p) for p in DEFAULT_POLICIES))
    arms: Tuple[PolicySpec, PolicySpec] = field(default_factory=lambda: tuple(PolicySpec.parse(p) for p in DEFAULT_ARMS))
    seeds: Tuple[int, ...] = ExperimentDefaults.SEEDS
    output_dir: str = 'output'
    workers: int = ExperimentDefaults.WORKERS

    KEYS = ('TRACE', 'TRAINING_TRACE', 'POLICIES', 'ARM_A', 'ARM_B', 'SEEDS', 'OUTPUT_DIR',
            'HORIZON_DAYS', 'WORKERS')

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "ExperimentConfig":
        raw = section(values, 'EXPERIMENT_', cls.KEYS)
        workload = WorkloadConfig.from_mapping(values)
        prices = PriceProcessConfig.from_mapping(values)
        if prices.start_date != workload.start_date:
            prices = replace(prices, start_date=workload.start_date)
        kwargs = {
            'workload': workload,
            'prices': prices,
            'supplier': SupplierConfig.from_mapping(values),
        }
        try:
            if 'HORIZON_DAYS' in raw:
                kwargs['workload'] = replace(
                    workload, horizon=int(raw['HORIZON_DAYS']) * SimulationConfig.SECONDS_PER_DAY)
            if raw.get('SEEDS'):
                kwargs['seeds'] = tuple(int(s) for s in raw['SEEDS'].split(','))
            if 'WORKERS' in raw:
                kwargs['workers'] = int(raw['WORKERS'])
        except ValueError as exc:
            raise ConfigError(f"Invalid experiment config value: {exc}") from exc
        if raw.get('TRACE'):
            kwargs['trace_path'] = raw['TRACE']
        if raw.get('TRAINING_TRACE'):
            kwargs['training_trace_path'] = raw['TRAINING_TRACE']
        if raw.get('POLICIES'):
            kwargs['policies'] = _parse_policies(raw['POLICIES'])
        if raw.get('ARM_A') or raw.get('ARM_B'):
            kwargs['arms'] = (PolicySpec.parse(raw.get('ARM_A', DEFAULT_ARMS[0])),
                              PolicySpec.parse(raw.get('ARM_B', DEFAULT_ARMS[1])))
        if raw.get('OUTPUT_DIR'):
            kwargs['output_dir'] = raw['OUTPUT_DIR']
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Optional[str]) -> "ExperimentConfig":
        return cls.from_mapping(load_config_file(path))

    @property
    def horizon(self) -> int:
        return self.workload.horizon

    @property
    def horizon_days(self) -> int:
        return self.workload.horizon_days

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None,
                       workers: Optional[int] = None) -> "ExperimentConfig":
        changes = {}
        if seed is not None:
            changes['seeds'] = (seed,)
        if output_dir is not None:
            changes['output_dir'] = output_dir
        if workers is not None:
            changes['workers'] = workers
        return replace(self, **changes)

    def validate(self):
        for path in (self.trace_path, self.training_trace_path):
            if path is not None and not os.path.exists(path):
                raise FileNotFoundError(f"Trace not found: {path}")
        if not self.seeds:
            raise ConfigError("At least one seed is required")
        if self.trace_path is None and self.workload.n_datacentres != self.supplier.n_datacentres:
            raise ConfigError(f"Workload has {self.workload.n_datacentres} data-centre profile(s), "
                              f"supplier is configured for {self.supplier.n_datacentres}")


@dataclass
class ScenarioInputs:
    seed: int
    trace: List[UserSearch]
    training_trace: List[UserSearch]
    prices: PriceProcess
    training_prices: PriceProcess
    booking_model: BookingModel
    horizon: int


def build_inputs(config: ExperimentConfig, seed: int) -> ScenarioInputs:
    """Traces, ground-truth prices and booking propensities for one seed.

    Training uses its own arrivals and price timelines over the same itinerary universe.
    """
    workload = config.workload.with_seed(seed)
    if config.trace_path:
        trace = list(ingest_trace(config.trace_path))
    else:
        trace = list(generate_searches(workload, stream=0))
    if config.training_trace_path:
        training_trace = list(ingest_trace(config.training_trace_path))
    else:
        training_trace = list(generate_searches(workload, stream=TRAINING_STREAM))

    horizon = config.horizon
    prices = PriceProcess(config.prices, horizon, stable_hash('prices', seed))
    training_prices = PriceProcess(config.prices, horizon, stable_hash('training-prices', seed))
    booking_model = BookingModel(workload.booking_alpha, workload.booking_beta, seed)
    logger.info(f"Seed {seed}: {len(trace):,} searches, {len(training_trace):,} training searches")
    return ScenarioInputs(seed, trace, training_trace, prices, training_prices, booking_model, horizon)


def train_for(inputs: ScenarioInputs) -> TrainedModel:
    return train_model(inputs.training_trace, inputs.training_prices, inputs.seed, inputs.booking_model)
