import os
from datetime import date

from dotenv import load_dotenv

load_dotenv()


class SimulationConfig:
    SECONDS_PER_DAY = 86400
    START_DATE = date.fromisoformat(os.getenv('SIM_START_DATE', '2019-09-01'))
    HORIZON_DAYS = int(os.getenv('SIM_HORIZON_DAYS', '14'))
    PROGRESS_INTERVAL_DAYS = int(os.getenv('SIM_PROGRESS_INTERVAL_DAYS', '1'))
    # relative price difference a booking still succeeds with; 0 means exact equality
    PRICE_TOLERANCE = float(os.getenv('SIM_PRICE_TOLERANCE', '0.0'))


class ItineraryConfig:
    MAX_ADULTS = int(os.getenv('MAX_ADULTS', '8'))
    MAX_CHILDREN = int(os.getenv('MAX_CHILDREN', '8'))
    MAX_ROOMS = int(os.getenv('MAX_ROOMS', '4'))


class SupplierDefaults:
    QPS_LIMIT = int(os.getenv('SUPPLIER_QPS_LIMIT', '2'))
    N_DATACENTRES = int(os.getenv('SUPPLIER_N_DATACENTRES', '1'))


class TTLConfig:
    GRID_MIN_SECONDS = 900
    GRID_MAX_SECONDS = 86400
    GRID_STEP_SECONDS = 900
    DEFAULT_TTL_SECONDS = int(os.getenv('DEFAULT_TTL_SECONDS', '900'))
    MIN_DURATION_SAMPLES = int(os.getenv('MIN_DURATION_SAMPLES', '30'))
    LEAD_CAP_DAYS = int(os.getenv('LEAD_CAP_DAYS', '365'))
    EMIT_CENSORED = os.getenv('EMIT_CENSORED', 'false').lower() == 'true'

    @classmethod
    def ttl_grid(cls):
        return list(range(cls.GRID_MIN_SECONDS, cls.GRID_MAX_SECONDS + 1, cls.GRID_STEP_SECONDS))


class SchedulerConfig:
    RESERVE_PASSIVE_FRACTION = float(os.getenv('RESERVE_PASSIVE_FRACTION', '0.0'))
    ADMISSION = os.getenv('SCHEDULER_ADMISSION', 'atomic')
    # share of the daily budget the plan may fill, surplus refreshes included; 0 turns them off
    SURPLUS_FILL = float(os.getenv('SCHEDULER_SURPLUS_FILL', '0.9'))
    # sends per day an itinerary can be moved up to; each divides 86400 and the next one up
    REFRESH_FREQUENCIES = tuple(int(f) for f in os.getenv(
        'SCHEDULER_REFRESH_FREQUENCIES', '1,2,6,12,24,48,96,288,576,1152').split(','))


class EstimatorConfig:
    P_B_SMOOTHING_WEIGHT = 10.0
    TRAINING_TTL_SECONDS = int(os.getenv('TRAINING_TTL_SECONDS', '900'))
    # Supplier budget used for the training replay; observation quality, not policy comparison.
    TRAINING_QPS_LIMIT = int(os.getenv('TRAINING_QPS_LIMIT', '50'))


class ExperimentDefaults:
    AB_HORIZON_DAYS = 14
    ARM_NAMES = ('A', 'B')
    SEEDS = (1,)
    WORKERS = int(os.getenv('EXPERIMENT_WORKERS', '1'))


class LoggingConfig:
    LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class PathConfig:
    @staticmethod
    def get_project_root():
        return os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

    @staticmethod
    def get_demo_fetch_log_path():
        return os.path.join(PathConfig.get_project_root(), 'data', 'demo_fetch_log.csv')

    @staticmethod
    def get_demo_config_path(name: str):
        return os.path.join(PathConfig.get_project_root(), 'configs', name)
