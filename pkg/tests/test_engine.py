import numpy as np
import pandas as pd
import pytest

from core.errors import ConfigError, UnknownDataCentreError
from scheduler.value_table import ValueRow, ValueTable
from simulation.engine import BookingDraws, SimulationEngine, first_occurrence_fraction, run
from simulation.policies import PolicySpec
from simulators.booking_model import BookingModel
from simulators.distributions import DistributionSpec
from simulators.price_process import PriceProcess, PriceProcessConfig, static_price_process
from simulators.search_generator import WorkloadConfig, generate_searches
from simulators.traffic_profile import TrafficProfile
from smartttl.clustering import ClusterKey
from smartttl.ttl_table import TtlRow, TtlTable
from supplier.supplier import SupplierConfig
from tests.helpers import DAY, make_itinerary, make_search

FIXED_900 = PolicySpec.parse('passive_fixed_ttl:900')


class AlwaysBook(BookingModel):
    def p_b(self, itinerary):
        return 1.0


def changing_prices(horizon, every=100):
    return PriceProcess(PriceProcessConfig(default_duration=DistributionSpec.parse(f'fixed:{every}')), horizon, 1)


def test_empty_trace():
    metrics = run([], SupplierConfig(1, 1), FIXED_900, static_price_process(2 * DAY), seed=1)
    assert len(metrics.days) == 2
    assert metrics.total().searches == 0
    assert metrics.bookings == 0
    assert metrics.qps.empty


def test_miss_then_fetch_then_hit():
    it = make_itinerary()
    trace = [make_search(it, 0), make_search(it, 10), make_search(it, 900)]
    day = run(trace, SupplierConfig(1, 1), FIXED_900, static_price_process(DAY), seed=1).days[0]
    assert (day.searches, day.hits, day.fetches, day.rejected) == (3, 1, 2, 0)


def test_rejected_fetch_leaves_the_search_unserved():
    a, b = make_itinerary(hotel=1), make_itinerary(hotel=2)
    trace = [make_search(a, 5), make_search(b, 5), make_search(b, 6)]
    day = run(trace, SupplierConfig(1, 1), FIXED_900, static_price_process(DAY), seed=1).days[0]
    assert (day.hits, day.fetches, day.rejected) == (0, 2, 1)


def test_static_prices_book_every_attempt():
    it = make_itinerary()
    trace = [make_search(it, t) for t in range(0, 800, 10)]
    metrics = run(trace, SupplierConfig(1, 1), FIXED_900, static_price_process(DAY), seed=1,
                  booking_model=AlwaysBook())
    total = metrics.total()
    assert total.attempts == total.hits == len(trace) - 1
    assert total.accuracy == 1.0


def test_changing_prices_lose_bookings_unless_tolerated():
    it = make_itinerary()
    trace = [make_search(it, t) for t in range(0, 3000, 7)]
    prices = changing_prices(DAY)
    strict = run(trace, SupplierConfig(1, 1), FIXED_900, prices, seed=1, booking_model=AlwaysBook()).total()
    assert 0 < strict.bookings < strict.attempts
    tolerant = run(trace, SupplierConfig(1, 1), FIXED_900, prices, seed=1, booking_model=AlwaysBook(),
                   price_tolerance=1.0).total()
    assert tolerant.bookings == tolerant.attempts == strict.attempts


def test_runs_are_deterministic():
    config = WorkloadConfig(n_hotels=5, itineraries_per_hotel=4, horizon=DAY, searches_per_second=0.02,
                            dc_traffic_profiles=(TrafficProfile.named('flat'),), seed=3)
    trace = list(generate_searches(config))
    frames = [run(trace, SupplierConfig(1, 1), FIXED_900, changing_prices(DAY, 3000), seed=7).to_frame()
              for _ in range(2)]
    assert frames[0].equals(frames[1])


def test_passive_hit_rate_never_beats_first_occurrence_ceiling():
    config = WorkloadConfig(n_hotels=10, itineraries_per_hotel=5, horizon=DAY, searches_per_second=0.01,
                            dc_traffic_profiles=(TrafficProfile.named('flat'),), seed=5)
    trace = list(generate_searches(config))
    ceiling = 1.0 - first_occurrence_fraction(trace)
    for ttl in (900, 3600, 86400):
        metrics = run(trace, SupplierConfig(5, 1), PolicySpec.parse(f'passive_fixed_ttl:{ttl}'),
                      static_price_process(DAY), seed=1)
        assert metrics.hit_rate <= ceiling + 1e-12
    assert metrics.hit_rate == pytest.approx(ceiling)


def test_first_occurrence_fraction():
    a, b = make_itinerary(hotel=1), make_itinerary(hotel=2)
    assert first_occurrence_fraction([make_search(a, 0), make_search(a, 1), make_search(b, 2),
                                      make_search(a, 3), make_search(b, 4)]) == 0.4
    assert first_occurrence_fraction([]) == 0.0


def test_aggressive_lru_keeps_searched_itineraries_fresh():
    it = make_itinerary()
    trace = [make_search(it, 0), make_search(it, 5000)]
    lru = run(trace, SupplierConfig(2, 1), PolicySpec.parse('aggressive_lru:10:900'),
              static_price_process(DAY), seed=1)
    passive = run(trace, SupplierConfig(2, 1), FIXED_900, static_price_process(DAY), seed=1)
    assert lru.total().hits == 1
    assert passive.total().hits == 0
    assert lru.qps.max() <= 2
    assert lru.total().fetches > passive.total().fetches


def scheduler_inputs(itineraries):
    values = ValueTable([ValueRow(it, 0.5, 1.0, 10.0) for it in itineraries])
    return TtlTable([TtlRow(ClusterKey(30), 900, 30, 30)]), values


def test_smart_scheduler_serves_planned_itineraries_without_miss_fetches():
    planned = [make_itinerary(hotel=i, lead=30) for i in range(3)]
    stranger = make_itinerary(hotel=50, lead=30)
    ttl_table, values = scheduler_inputs(planned)
    trace = [make_search(planned[0], 1000), make_search(stranger, 1200), make_search(planned[2], 40_000)]
    metrics = run(trace, SupplierConfig(1, 1), PolicySpec.parse('aggressive_smart_scheduler'),
                  static_price_process(DAY), seed=1, ttl_table=ttl_table, value_table=values)
    day = metrics.days[0]
    assert (day.searches, day.hits) == (3, 2)
    assert day.fetches == 3 * 96
    assert day.rejected == 0
    assert metrics.qps.max() <= 1


def test_smart_scheduler_reserve_fetches_misses():
    planned = [make_itinerary(hotel=i, lead=30) for i in range(3)]
    stranger = make_itinerary(hotel=50, lead=30)
    ttl_table, values = scheduler_inputs(planned)
    metrics = run([make_search(stranger, 1200), make_search(stranger, 1300)], SupplierConfig(4, 1),
                  PolicySpec.parse('aggressive_smart_scheduler:0.5'), static_price_process(DAY), seed=1,
                  ttl_table=ttl_table, value_table=values)
    assert metrics.days[0].hits == 1
    assert metrics.qps.max() <= 4


def test_multi_day_aggressive_run_replans_daily():
    planned = [make_itinerary(hotel=i, lead=30) for i in range(2)]
    ttl_table, values = scheduler_inputs(planned)
    metrics = run([make_search(planned[1], DAY + 10)], SupplierConfig(1, 1),
                  PolicySpec.parse('aggressive_smart_scheduler'), static_price_process(2 * DAY), seed=1,
                  ttl_table=ttl_table, value_table=values)
    assert [d.fetches for d in metrics.days] == [2 * 96, 2 * 96]
    assert metrics.days[1].hits == 1


def test_engine_configuration_errors():
    prices = static_price_process(DAY)
    with pytest.raises(ConfigError):
        SimulationEngine(SupplierConfig(1, 1), PolicySpec.parse('passive_smart_ttl'), prices, seed=1)
    with pytest.raises(ConfigError):
        SimulationEngine(SupplierConfig(1, 1), PolicySpec.parse('aggressive_smart_scheduler'), prices, seed=1,
                         ttl_table=TtlTable([]))
    with pytest.raises(ConfigError):
        SimulationEngine(SupplierConfig(1, 1), FIXED_900, prices, seed=1, price_tolerance=-0.1)


def test_unknown_datacentre_in_trace():
    with pytest.raises(UnknownDataCentreError):
        run([make_search(make_itinerary(), 0, dc_id=3)], SupplierConfig(2, 2), FIXED_900,
            static_price_process(DAY), seed=1)


def test_searches_past_the_horizon_are_dropped():
    it = make_itinerary()
    metrics = run([make_search(it, 10), make_search(it, DAY + 5)], SupplierConfig(1, 1), FIXED_900,
                  static_price_process(DAY), seed=1)
    assert metrics.total().searches == 1


def test_booking_draws_are_a_fixed_stream():
    a, b = BookingDraws(3), BookingDraws(3)
    first = [a.next() for _ in range(5000)]
    assert first == [b.next() for _ in range(5000)]
    assert all(0.0 <= u < 1.0 for u in first)
    assert first != [BookingDraws(4).next() for _ in range(5000)]


@pytest.mark.parametrize("policy", ['aggressive_smart_scheduler:0:0', 'aggressive_smart_scheduler'])
def test_planned_itineraries_stay_cached_across_midnights(policy):
    # TTLs change with the check-in lead, so every itinerary moves to another period each midnight
    ttl_by_lead = {25: 900, 26: 3600, 27: 1800, 28: 900, 29: 3600, 30: 1800, 31: 900}
    ttl_table = TtlTable([TtlRow(ClusterKey(lead), ttl, 30, 30) for lead, ttl in ttl_by_lead.items()])
    its = [make_itinerary(hotel=i, lead=28 + i % 4) for i in range(12)]
    values = ValueTable([ValueRow(it, 0.2, 0.7, 1.0 + i) for i, it in enumerate(its)])
    trace = [make_search(its[k % len(its)], t) for k, t in enumerate(range(DAY, 3 * DAY, 37))]
    metrics = run(trace, SupplierConfig(1, 1), PolicySpec.parse(policy), static_price_process(3 * DAY), seed=1,
                  ttl_table=ttl_table, value_table=values)
    for day in metrics.days[1:]:
        assert day.searches > 0
        assert day.hits == day.searches
    assert metrics.qps.max() <= 1


def test_supplier_utilization_follows_diurnal_arrivals():
    config = WorkloadConfig(n_hotels=200, itineraries_per_hotel=50, horizon=2 * DAY, searches_per_second=0.5,
                            popularity_skew=0.0, dc_traffic_profiles=(TrafficProfile.named('evening_peak'),),
                            seed=9)
    trace = list(generate_searches(config))
    engine = SimulationEngine(SupplierConfig(50, 1), FIXED_900, static_price_process(2 * DAY), seed=1,
                              record_utilization=True)
    utilization = engine.run(trace).utilization
    assert utilization['rejected'].sum() == 0

    arrivals = pd.Series([s.timestamp // 3600 for s in trace]).value_counts().sort_index()
    accepted = utilization.groupby(utilization['second'] // 3600)['accepted'].sum()
    hourly = pd.DataFrame({'arrivals': arrivals, 'accepted': accepted}).fillna(0)
    assert hourly['arrivals'].max() > 3 * hourly['arrivals'].min()
    assert np.corrcoef(hourly['arrivals'], hourly['accepted'])[0, 1] > 0.99
    busy = hourly[hourly['arrivals'] >= 50]
    ratio = busy['accepted'] / busy['arrivals']
    assert ratio.between(0.85, 1.0).all()
