import numpy as np
import pytest
from scipy.stats import ks_2samp

from simulators.booking_model import BookingModel
from simulators.distributions import DistributionSpec
from simulators.price_process import (PriceProcess, PriceProcessConfig, generate_price_timeline, parse_bands,
                                      static_price_process)
from tests.helpers import make_itinerary


def config_with(default: str, **overrides) -> PriceProcessConfig:
    return PriceProcessConfig(default_duration=DistributionSpec.parse(default), **overrides)


def test_fixed_durations_split_the_horizon():
    timeline = generate_price_timeline(config_with('fixed:1860'), make_itinerary(), 5580, seed=1)
    assert timeline.starts == [0, 1860, 3720]
    assert len(timeline) == 3
    assert timeline.segment_lengths(5580) == [1860, 1860]


def test_every_boundary_changes_the_price():
    timeline = generate_price_timeline(config_with('exponential:600', sold_out_probability=0.2),
                                       make_itinerary(), 200_000, seed=3)
    pairs = list(zip(timeline.prices, timeline.available))
    assert all(a != b for a, b in zip(pairs, pairs[1:]))
    assert any(not flag for flag in timeline.available)
    assert all(price == 0 for price, flag in pairs if not flag)


def test_exponential_mean_segment_length():
    config = config_with('exponential:3600')
    lengths = []
    for hotel in range(20):
        lengths.extend(generate_price_timeline(config, make_itinerary(hotel=hotel), 10_000_000, seed=5)
                       .segment_lengths(10_000_000))
    assert np.mean(lengths) == pytest.approx(3600, rel=0.02)


@pytest.mark.parametrize("text", ['lognormal:1800:1.0', 'empirical:300=0.8,7200=0,86400=0.2'])
def test_pooled_segment_lengths_follow_the_duration_distribution(text):
    config = config_with(text)
    horizon = 3_000_000
    lengths = []
    for hotel in range(60):
        lengths.extend(generate_price_timeline(config, make_itinerary(hotel=hotel), horizon, seed=4)
                       .segment_lengths(horizon))
    assert len(lengths) >= 10_000
    reference = config.default_duration.sample(np.random.default_rng(99), len(lengths))
    assert ks_2samp(lengths, reference).pvalue > 0.001


def test_price_at_is_piecewise_constant():
    timeline = generate_price_timeline(config_with('fixed:100'), make_itinerary(), 1000, seed=2)
    assert timeline.price_at(0) == timeline.price_at(99)
    assert timeline.price_at(100) != timeline.price_at(99)
    assert timeline.segment_index(250) == 2


def test_timelines_are_deterministic_per_itinerary_and_seed():
    config = config_with('exponential:900')
    a = generate_price_timeline(config, make_itinerary(hotel=1), 86400, seed=9)
    b = generate_price_timeline(config, make_itinerary(hotel=1), 86400, seed=9)
    c = generate_price_timeline(config, make_itinerary(hotel=1), 86400, seed=10)
    assert a.segments() == b.segments()
    assert a.segments() != c.segments()


def test_lead_bands_pick_the_duration():
    bands = parse_bands('0-6=fixed:600;7-29=fixed:7200')
    config = config_with('fixed:86400', lead_bands=bands)
    assert config.duration_for(3, True).to_text() == 'fixed:600'
    assert config.duration_for(10, True).to_text() == 'fixed:7200'
    assert config.duration_for(100, True).to_text() == 'fixed:86400'
    assert config.duration_for(3, False) == config.sold_out_duration
    short = generate_price_timeline(config, make_itinerary(lead=2), 6000, seed=1)
    assert short.starts == list(range(0, 6000, 600))


def test_static_process_never_changes():
    process = static_price_process(86400 * 3, seed=4)
    it = make_itinerary()
    assert process.price_at(it, 0) == process.price_at(it, 86400 * 3 - 1)
    assert len(process.timeline(it)) == 1


def test_process_caches_timelines():
    process = PriceProcess(config_with('exponential:3600'), 86400, seed=1)
    it = make_itinerary()
    assert process.timeline(it) is process.timeline(it)
    assert process.get_stats()['itineraries'] == 1


def test_booking_model_is_keyed_by_itinerary():
    model = BookingModel(2.0, 30.0, seed=1)
    it = make_itinerary()
    assert model.p_b(it) == BookingModel(2.0, 30.0, seed=1).p_b(it)
    assert 0.0 <= model.p_b(it) <= 1.0
    assert model.mean == pytest.approx(2 / 32)
    assert model.p_b(make_itinerary(hotel=99)) != model.p_b(it)
    with pytest.raises(ValueError):
        BookingModel(0.0, 1.0)
