"""Gaussian and interval information granules, justifiable granularity"""

import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from .errors import DomainError

# Candidate widths for the weighted width search, tie-break toward the smallest
WIDTH_GRID = np.round(np.arange(1, 101) / 100.0, 2)

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class GaussianGranule:
    """One-dimensional Gaussian fuzzy set exp(−(x−center)²/spread²)"""
    center: float
    spread: float
    calibration_range: float = 1.0
    units: str = "normalized"

    def __post_init__(self):
        if not self.spread > 0:
            raise DomainError(f"spread must be > 0, got {self.spread}")
        if not self.calibration_range > 0:
            raise DomainError(f"calibration range must be > 0, got {self.calibration_range}")

    def membership(self, x):
        return gaussian_membership(self, x)

    @property
    def specificity(self) -> float:
        return gaussian_specificity(self)

    def to_dict(self) -> Dict[str, object]:
        return {
            "center": self.center,
            "spread": self.spread,
            "calibration_range": self.calibration_range,
            "units_flag": self.units,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "GaussianGranule":
        return cls(
            center=float(data["center"]),
            spread=float(data["spread"]),
            calibration_range=float(data.get("calibration_range", 1.0)),
            units=str(data.get("units_flag", "normalized")),
        )


@dataclass(frozen=True)
class IntervalGranule:
    """Interval granule [a, b]"""
    a: float
    b: float
    calibration_range: float = 1.0

    def __post_init__(self):
        if self.a > self.b:
            raise DomainError("interval requires a <= b")
        if not self.calibration_range > 0:
            raise DomainError("calibration range must be > 0")


@dataclass(frozen=True)
class WeightedSample:
    """Values with non-negative weights summing to one"""
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if values.shape != weights.shape:
            raise DomainError("values and weights must have the same length")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise DomainError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)


def _require_data(data) -> np.ndarray:
    data = np.asarray(data, dtype=float).reshape(-1)
    if data.size == 0:
        raise DomainError("data must be non-empty")
    return data


def gaussian_membership(g: GaussianGranule, x):
    """Membership degree in (0, 1]"""
    value = np.exp(-((np.asarray(x, dtype=float) - g.center) ** 2) / g.spread ** 2)
    return float(value) if np.ndim(value) == 0 else value


def interval_coverage(data: Sequence[float], g: IntervalGranule) -> float:
    """Fraction of data inside [a, b], endpoints included"""
    data = _require_data(data)
    return float(np.count_nonzero((data >= g.a) & (data <= g.b)) / data.size)


def interval_specificity(g: IntervalGranule) -> float:
    return max(0.0, 1.0 - (g.b - g.a) / g.calibration_range)


def fuzzy_coverage(data: Sequence[float], g: GaussianGranule, normalize: bool = False) -> float:
    """Sum of membership degrees, or their mean when `normalize` is set"""
    data = _require_data(data)
    total = float(np.sum(gaussian_membership(g, data)))
    return total / data.size if normalize else total


def gaussian_specificity(g: GaussianGranule) -> float:
    """Integral over α of 1 − width(α-cut)/range, α-cut width 2·spread·sqrt(ln 1/α)"""
    return max(0.0, 1.0 - g.spread * SQRT_PI / g.calibration_range)


def optimize_interval(data: Sequence[float]) -> IntervalGranule:
    """Interval maximizing coverage × specificity

    Candidate endpoints are the sorted unique data values plus the median;
    every pair a <= b is scored.
    """
    data = _require_data(data)
    lo, hi = float(data.min()), float(data.max())
    if lo == hi:
        return IntervalGranule(lo, hi, 1.0)
    span = hi - lo
    ordered = np.sort(data)
    candidates = np.unique(np.append(ordered, np.median(data)))

    below = np.searchsorted(ordered, candidates, side="left")   # count < a
    upto = np.searchsorted(ordered, candidates, side="right")   # count <= b

    best = (-1.0, 0, 0)
    for i, a in enumerate(candidates):
        b = candidates[i:]
        coverage = (upto[i:] - below[i]) / data.size
        specificity = np.maximum(0.0, 1.0 - (b - a) / span)
        product = coverage * specificity
        j = int(np.argmax(product))
        if product[j] > best[0]:
            best = (float(product[j]), i, i + j)
    _, i, j = best
    return IntervalGranule(float(candidates[i]), float(candidates[j]), span)


def width_products(center: float, sample: WeightedSample, grid: np.ndarray = WIDTH_GRID) -> np.ndarray:
    """cov(σ)·(1−σ) for every σ of the grid"""
    sq = (sample.values - center) ** 2
    coverage = np.exp(-sq[None, :] / grid[:, None] ** 2) @ sample.weights
    return coverage * (1.0 - grid)


def optimize_width(center: float, sample: WeightedSample) -> float:
    """Width on the search grid maximizing weighted coverage × (1 − σ)"""
    products = width_products(center, sample)
    return float(WIDTH_GRID[int(np.argmax(products))])
