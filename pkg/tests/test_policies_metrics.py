import pytest

from core.errors import ConfigError
from simulation.metrics import METRICS_COLUMNS, DayMetrics, Metrics
from simulation.policies import (AGGRESSIVE_LRU, AGGRESSIVE_SMART_SCHEDULER, PASSIVE_FIXED_TTL,
                                 PASSIVE_SMART_TTL, PolicySpec)


@pytest.mark.parametrize("text", ['passive_fixed_ttl:900', 'passive_smart_ttl', 'aggressive_lru:5000',
                                  'aggressive_lru:5000:900', 'aggressive_smart_scheduler',
                                  'aggressive_smart_scheduler:0.2', 'aggressive_smart_scheduler:0:0.5',
                                  'aggressive_smart_scheduler:0.2:0'])
def test_policy_text_round_trip(text):
    assert PolicySpec.parse(text).to_text() == text


@pytest.mark.parametrize("text", ['passive_fixed_ttl', 'passive_fixed_ttl:0', 'aggressive_lru',
                                  'aggressive_lru:0', 'aggressive_smart_scheduler:1.5', 'lfu:10',
                                  'passive_fixed_ttl:fast', 'aggressive_smart_scheduler:0:1.5',
                                  'aggressive_smart_scheduler:0:0.5:1'])
def test_policy_parse_errors(text):
    with pytest.raises(ConfigError):
        PolicySpec.parse(text)


def test_policy_properties():
    fixed = PolicySpec.parse('passive_fixed_ttl:900')
    assert (fixed.variant, fixed.ttl, fixed.is_aggressive, fixed.needs_model) == (PASSIVE_FIXED_TTL, 900, False, False)
    assert PolicySpec.parse('passive_smart_ttl').variant == PASSIVE_SMART_TTL
    lru = PolicySpec.parse('aggressive_lru:10')
    assert lru.variant == AGGRESSIVE_LRU and lru.is_aggressive and lru.uses_smart_ttl and lru.fetches_on_miss
    assert not PolicySpec.parse('aggressive_lru:10:900').needs_model
    scheduler = PolicySpec.parse('aggressive_smart_scheduler')
    assert scheduler.variant == AGGRESSIVE_SMART_SCHEDULER
    assert not scheduler.fetches_on_miss
    assert PolicySpec.parse('aggressive_smart_scheduler:0.25').fetches_on_miss
    assert PolicySpec.parse('aggressive_smart_scheduler:0:0.5').surplus_fill == 0.5
    assert not PolicySpec.parse('aggressive_smart_scheduler:0:0.5').fetches_on_miss


def test_day_metrics_rates():
    day = DayMetrics(searches=10, hits=4, attempts=4, bookings=3)
    assert day.misses == 6
    assert day.hit_rate == 0.4
    assert day.accuracy == 0.75
    assert DayMetrics().hit_rate == 0.0
    assert DayMetrics().accuracy == 0.0


def test_metrics_total_and_frame():
    metrics = Metrics('A', [DayMetrics(searches=3, hits=1, bookings=1, attempts=1),
                            DayMetrics(searches=3, hits=2, fetches=1)])
    assert metrics.total().searches == 6
    assert metrics.bookings == 1
    assert metrics.hit_rate == 0.5
    frame = metrics.to_frame()
    assert list(frame.columns) == METRICS_COLUMNS
    assert frame['day'].tolist() == ['0', '1', 'total']
    assert frame['hit_rate'].tolist() == [round(1 / 3, 6), round(2 / 3, 6), 0.5]
    assert len(metrics.to_frame(include_total=False)) == 2
    assert len(Metrics.empty('B', 3).days) == 3
