import pytest

from core.errors import ConfigError, UnknownDataCentreError
from simulators.price_process import static_price_process
from supplier.rate_limiter import RateLimiter
from supplier.supplier import Supplier, SupplierConfig, even_allocation
from tests.helpers import make_itinerary


def test_even_allocation_gives_remainder_to_low_ids():
    assert even_allocation(5, 3) == (2, 2, 1)
    assert even_allocation(2, 1) == (2,)


def test_single_dc_limit_two():
    limiter = RateLimiter(2, [2])
    assert [limiter.try_acquire(0, 10) for _ in range(3)] == [True, True, False]
    assert limiter.try_acquire(0, 11)
    assert limiter.accepted_total == 3
    assert limiter.rejected_total == 1


def test_per_dc_and_total_caps():
    limiter = RateLimiter(3, [2, 1])
    assert limiter.try_acquire(1, 0)
    assert not limiter.try_acquire(1, 0)
    assert limiter.remaining(0, 0) == 2
    assert limiter.remaining_total(0) == 2
    assert limiter.try_acquire(0, 0)
    assert limiter.try_acquire(0, 0)
    assert not limiter.try_acquire(0, 0)
    assert limiter.remaining_total(0) == 0
    assert limiter.remaining_total(1) == 3


def test_refusal_does_not_consume_budget():
    limiter = RateLimiter(1, [1])
    assert limiter.try_acquire(0, 0)
    for _ in range(5):
        assert not limiter.try_acquire(0, 0)
    report = limiter.utilization_report()
    assert report.to_dict('records') == [{'dc_id': 0, 'second': 0, 'accepted': 1, 'rejected': 5}]


def test_time_cannot_go_backwards():
    limiter = RateLimiter(1, [1])
    limiter.try_acquire(0, 5)
    with pytest.raises(ValueError):
        limiter.try_acquire(0, 4)


def test_unknown_dc():
    limiter = RateLimiter(2, [1, 1])
    with pytest.raises(UnknownDataCentreError):
        limiter.try_acquire(2, 0)


def test_utilization_report_with_horizon_covers_idle_seconds():
    limiter = RateLimiter(2, [1, 1])
    limiter.try_acquire(0, 1)
    limiter.try_acquire(1, 1)
    limiter.try_acquire(1, 1)
    report = limiter.utilization_report(horizon=3)
    assert len(report) == 6
    assert report['accepted'].sum() == 2
    assert report['rejected'].sum() == 1
    assert report[report['second'] == 0]['accepted'].sum() == 0
    assert limiter.per_second_totals().to_dict() == {1: 2}
    assert limiter.audit() == []


def test_invalid_limiter_configuration():
    with pytest.raises(ValueError):
        RateLimiter(0, [0])
    with pytest.raises(ValueError):
        RateLimiter(2, [2, 1])


def test_supplier_config_validation_and_split():
    assert SupplierConfig(5, 2).per_dc_allocation == (3, 2)
    with pytest.raises(ConfigError):
        SupplierConfig(0, 1)
    with pytest.raises(ConfigError):
        SupplierConfig(2, 2, (2, 1))
    half = SupplierConfig(4, 2).split(2)
    assert half.qps_limit == 2
    assert half.per_dc_allocation == (1, 1)
    assert SupplierConfig(5, 1).split(2).qps_limit == 2
    with pytest.raises(ConfigError):
        SupplierConfig(1, 1).split(2)


def test_supplier_config_from_mapping():
    config = SupplierConfig.from_mapping({'SUPPLIER_QPS_LIMIT': '6', 'SUPPLIER_N_DATACENTRES': '2',
                                          'SUPPLIER_PER_DC_ALLOCATION': '4,2'})
    assert config.per_dc_allocation == (4, 2)
    assert config.effective_qps == 6
    with pytest.raises(ConfigError):
        SupplierConfig.from_mapping({'SUPPLIER_QPS_LIMIT': 'many'})


def test_supplier_fetch_returns_untimed_quote_or_none():
    prices = static_price_process(86400, seed=1)
    supplier = Supplier(SupplierConfig(1, 1), prices)
    it = make_itinerary()
    quote = supplier.fetch(it, 0, 100)
    assert quote.ttl is None
    assert quote.fetched_at == 100
    assert (quote.price, quote.available) == prices.price_at(it, 100)
    assert supplier.fetch(it, 0, 100) is None
    assert supplier.remaining(0, 100) == 0
    assert supplier.get_stats()['rejected'] == 1
