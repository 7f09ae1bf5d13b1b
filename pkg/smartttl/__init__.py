from .assignment import Cluster, MissRatioCurve, accuracy_estimate, assign_ttl, miss_ratio_curve
from .clustering import ClusterKey, cluster, gap_samples
from .extraction import DurationSample, extract_durations
from .ttl_table import TtlRow, TtlTable, build_ttl_table

__all__ = [
    'Cluster', 'MissRatioCurve', 'accuracy_estimate', 'assign_ttl', 'miss_ratio_curve',
    'ClusterKey', 'cluster', 'gap_samples', 'DurationSample', 'extract_durations',
    'TtlRow', 'TtlTable', 'build_ttl_table',
]
