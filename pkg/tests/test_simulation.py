import numpy as np
import pytest
from scipy import stats

from capsel.model import ConfigError
from capsel.simulation import (
    SimulationSpec,
    error_curve,
    location_for_mean,
    make_feature_pool,
    sample_truncated_normal,
    simulate_error_rate,
    simulate_scores,
    truncated_moments,
    variance_of_weighted_average,
)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SimulationSpec(1, theta=0.6)
    with pytest.raises(ConfigError):
        SimulationSpec(1, sigma0=0.0)
    with pytest.raises(ConfigError):
        SimulationSpec(0)


def test_sampler_support_and_moments():
    rng = np.random.default_rng(0)
    x = sample_truncated_normal(rng, 0.05, 0.2, 200_000)
    assert x.min() >= 0.0 and x.max() <= 1.0
    mean, sd = truncated_moments(0.05, 0.2)
    assert x.mean() == pytest.approx(mean, abs=3e-3)
    assert x.std() == pytest.approx(sd, rel=1e-2)


def test_location_for_mean():
    for target, sigma in [(0.1, 0.3), (0.4, 0.3), (0.5, 0.2), (0.95, 0.1)]:
        loc = location_for_mean(target, sigma)
        assert truncated_moments(loc, sigma)[0] == pytest.approx(target, abs=1e-10)
    with pytest.raises(ConfigError):
        location_for_mean(0.0, 0.2)


def test_tiny_sigma_gives_no_errors():
    assert simulate_error_rate(SimulationSpec(3, sigma0=1e-6, sigma1=1e-6, n_samples=2000)) == 0.0


def test_single_feature_error_matches_direct_draw():
    spec = SimulationSpec(1, p0=0.0, p1=0.5, sigma0=0.25, sigma1=0.25, n_samples=10_000, seed=4)
    neg, pos = simulate_scores(spec)
    direct = (np.count_nonzero(neg > 0.25) + np.count_nonzero(pos <= 0.25)) / 20_000
    assert simulate_error_rate(spec) == direct
    # and against the analytic crossing probabilities of the truncated laws
    law0 = stats.truncnorm(0, 1 / 0.25, loc=0.0, scale=0.25)
    law1 = stats.truncnorm(-2, 2, loc=0.5, scale=0.25)
    expected = 0.5 * (law0.sf(0.25) + law1.cdf(0.25))
    se = np.sqrt(expected * (1 - expected) / 20_000)
    assert abs(direct - expected) < 4 * se


def test_error_decreases_with_ensemble_size():
    rows = error_curve(SimulationSpec(1, seed=2), [1, 5, 100])
    (_, e1, s1), (_, e5, s5), (_, e100, _) = rows
    assert e5 < e1 - 3 * np.hypot(s1, s5)
    assert e100 < e5 - 3 * s5


def test_simulation_reproducible():
    spec = SimulationSpec(7, n_samples=500, seed=11)
    a = simulate_scores(spec)
    b = simulate_scores(spec)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    other = simulate_scores(SimulationSpec(7, n_samples=500, seed=12))
    assert not np.array_equal(a[0], other[0])


def test_weighted_scores_use_weights():
    spec = SimulationSpec(3, n_samples=50, seed=1)
    w = np.array([1.0, 0.0, 0.0])
    neg, _ = simulate_scores(spec, w)
    neg_u, _ = simulate_scores(spec)
    assert not np.allclose(neg, neg_u)
    with pytest.raises(ConfigError):
        simulate_scores(spec, np.ones(2))


def test_variance_formula():
    assert variance_of_weighted_average(np.ones(8), 1.0) == pytest.approx(1 / 8)
    assert variance_of_weighted_average([0, 0, 3.0, 0], 0.3) == pytest.approx(0.09)
    w = np.random.default_rng(0).random(10)
    assert variance_of_weighted_average(5 * w, 0.2) == pytest.approx(variance_of_weighted_average(w, 0.2))
    with pytest.raises(ConfigError):
        variance_of_weighted_average(np.zeros(3), 1.0)
    with pytest.raises(ConfigError):
        variance_of_weighted_average([1.0, -1.0], 1.0)


def test_uniform_weights_minimize_variance():
    rng = np.random.default_rng(3)
    u = variance_of_weighted_average(np.ones(20), 0.2)
    for _ in range(1000):
        w = rng.random(20)
        assert variance_of_weighted_average(w, 0.2) > u


def test_feature_pool_construction():
    F, y = make_feature_pool(4000, 3, 5, gap=0.3, seed=0)
    assert F.shape == (4000, 8)
    assert y.sum() == 2000
    assert F.min() >= 0 and F.max() <= 1
    gap = F[y == 1, :3].mean() - F[y == 0, :3].mean()
    assert gap == pytest.approx(0.3, abs=0.01)
    noise_gap = F[y == 1, 3:].mean() - F[y == 0, 3:].mean()
    assert abs(noise_gap) < 0.01
