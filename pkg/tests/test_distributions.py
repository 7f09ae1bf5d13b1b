import numpy as np
import pytest
from scipy.stats import ks_2samp

from core.errors import ConfigError
from simulators.distributions import DistributionSpec


@pytest.mark.parametrize("text", ['fixed:1860', 'exponential:3600', 'lognormal:3600:0.8',
                                  'empirical:300=0.8,7200=0,86400=0.2', 'constant'])
def test_parse_to_text(text):
    assert DistributionSpec.parse(text).to_text() == text


@pytest.mark.parametrize("text", ['uniform:3', 'fixed:0', 'exponential', 'lognormal:3600',
                                  'empirical:300=0.5,200=0.5', 'empirical:300=0', 'fixed:abc'])
def test_parse_rejects_bad_specs(text):
    with pytest.raises(ConfigError):
        DistributionSpec.parse(text)


def test_exponential_mean_within_two_percent():
    rng = np.random.default_rng(7)
    samples = DistributionSpec.parse('exponential:3600').sample(rng, 200_000)
    assert samples.min() >= 1
    assert samples.mean() == pytest.approx(3600, rel=0.02)


def test_exponential_matches_reference_distribution():
    samples = DistributionSpec.parse('exponential:3600').sample(np.random.default_rng(1), 5000)
    reference = np.random.default_rng(2).exponential(3600, 5000)
    assert ks_2samp(samples, reference).pvalue > 0.001


def test_fixed_and_constant():
    rng = np.random.default_rng(0)
    assert DistributionSpec.parse('fixed:1860').sample(rng, 4).tolist() == [1860] * 4
    constant = DistributionSpec.parse('constant')
    assert constant.is_infinite
    assert constant.sample(rng, 3).tolist() == [-1, -1, -1]
    assert constant.mean() == float('inf')


def test_empirical_bins_hold_their_mass():
    spec = DistributionSpec.parse('empirical:300=0.8,7200=0,86400=0.2')
    samples = spec.sample(np.random.default_rng(3), 100_000)
    assert (samples <= 300).mean() == pytest.approx(0.8, abs=0.01)
    assert ((samples > 300) & (samples <= 7200)).sum() == 0
    assert samples.max() <= 86400
    assert spec.mean() == pytest.approx(0.8 * 150 + 0.2 * (7200 + 86400) / 2)


def test_lognormal_median():
    samples = DistributionSpec.parse('lognormal:3600:0.5').sample(np.random.default_rng(4), 100_000)
    assert np.median(samples) == pytest.approx(3600, rel=0.02)
