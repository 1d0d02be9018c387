import math

import numpy as np
import pytest
from scipy.integrate import quad

from app.core.errors import DomainError
from app.core.granulation import (
    WIDTH_GRID,
    GaussianGranule,
    IntervalGranule,
    WeightedSample,
    fuzzy_coverage,
    gaussian_membership,
    gaussian_specificity,
    interval_coverage,
    interval_specificity,
    optimize_interval,
    optimize_width,
)


def brute_force_interval_product(data: np.ndarray) -> float:
    span = data.max() - data.min()
    a = data[:, None]
    b = data[None, :]
    inside = (data[None, None, :] >= a[..., None]) & (data[None, None, :] <= b[..., None])
    coverage = inside.sum(axis=2) / data.size
    specificity = np.maximum(0.0, 1.0 - (b - a) / span)
    product = np.where(a <= b, coverage * specificity, -np.inf)
    return float(product.max())


def brute_force_width(center: float, sample: WeightedSample) -> float:
    best_sigma, best = None, -np.inf
    for sigma in WIDTH_GRID:
        coverage = sum(w * math.exp(-((v - center) ** 2) / sigma ** 2) for v, w in zip(sample.values, sample.weights))
        product = coverage * (1.0 - sigma)
        if product > best:
            best_sigma, best = float(sigma), product
    return best_sigma


def test_membership_peak_and_decay():
    g = GaussianGranule(0.5, 0.2)
    assert gaussian_membership(g, 0.5) == 1.0
    assert gaussian_membership(g, 0.7) == pytest.approx(math.exp(-1.0))
    assert g.membership(np.array([0.3, 0.7])).tolist() == pytest.approx([math.exp(-1.0)] * 2)


def test_invalid_granules():
    with pytest.raises(DomainError):
        GaussianGranule(0.0, 0.0)
    with pytest.raises(DomainError):
        IntervalGranule(1.0, 0.0)
    with pytest.raises(DomainError):
        WeightedSample(np.array([0.1, 0.2]), np.array([0.7, 0.7]))


def test_interval_coverage_and_specificity():
    data = [0.0, 0.25, 0.5, 0.75, 1.0]
    g = IntervalGranule(0.25, 0.75, 1.0)
    assert interval_coverage(data, g) == pytest.approx(0.6)
    assert interval_specificity(g) == pytest.approx(0.5)
    assert interval_specificity(IntervalGranule(0.0, 2.0, 1.0)) == 0.0
    with pytest.raises(DomainError):
        interval_coverage([], g)


def test_fuzzy_coverage_normalized_mean():
    data = np.array([0.1, 0.4, 0.9])
    g = GaussianGranule(0.4, 0.3)
    total = fuzzy_coverage(data, g)
    assert fuzzy_coverage(data, g, normalize=True) == pytest.approx(total / 3)


@pytest.mark.parametrize("spread", np.round(np.arange(1, 11) * 0.05, 2))
def test_gaussian_specificity_matches_alpha_cut_integral(spread):
    numeric, _ = quad(lambda a: 1.0 - 2.0 * spread * math.sqrt(math.log(1.0 / a)), 0.0, 1.0, limit=200)
    assert gaussian_specificity(GaussianGranule(0.0, spread)) == pytest.approx(numeric, abs=1e-4)


def test_gaussian_specificity_clamped_at_zero():
    assert gaussian_specificity(GaussianGranule(0.0, 2.0, calibration_range=1.0)) == 0.0


def test_optimize_interval_dominates_brute_force():
    rng = np.random.default_rng(21)
    for _ in range(20):
        data = rng.normal(size=100) * rng.uniform(0.5, 3.0)
        g = optimize_interval(data)
        product = interval_coverage(data, g) * interval_specificity(g)
        assert product >= brute_force_interval_product(data) - 1e-12


def test_optimize_interval_constant_data():
    g = optimize_interval([2.0, 2.0, 2.0])
    assert (g.a, g.b) == (2.0, 2.0)


def test_optimize_width_matches_grid_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(5, 60))
        values = rng.uniform(0.0, 1.0, size=n)
        weights = rng.random(n)
        sample = WeightedSample(values, weights / weights.sum())
        center = float(rng.uniform(0.0, 1.0))
        assert optimize_width(center, sample) == brute_force_width(center, sample)


def test_optimize_width_point_mass_picks_smallest():
    sample = WeightedSample(np.array([0.3]), np.array([1.0]))
    assert optimize_width(0.3, sample) == WIDTH_GRID[0]


def test_fuzzy_coverage_of_two_symmetric_points():
    g = GaussianGranule(0.5, 0.5, 1.0)
    assert fuzzy_coverage([0.0, 1.0], g) == pytest.approx(2 * math.exp(-1.0))
    assert fuzzy_coverage([0.0, 1.0], g, normalize=True) == pytest.approx(math.exp(-1.0))


def test_distant_point_widens_the_granule():
    at_center = optimize_width(0.0, WeightedSample(np.array([0.0]), np.array([1.0])))
    distant = optimize_width(0.0, WeightedSample(np.array([0.9]), np.array([1.0])))
    assert at_center == WIDTH_GRID[0]
    assert distant > at_center
