"""Pydantic models for run configuration and pipeline records"""

import math
from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Domain boxes and parameter ranges
class ParameterSpec(BaseModel):
    """Admissible range of one physical parameter"""
    model_config = ConfigDict(frozen=True)

    name: str
    min: float
    max: float

    @model_validator(mode="after")
    def check_range(self) -> "ParameterSpec":
        if not self.min < self.max:
            raise ValueError(f"parameter {self.name}: min must be < max")
        return self

    @property
    def center(self) -> float:
        return 0.5 * (self.min + self.max)

    @property
    def width(self) -> float:
        return self.max - self.min


class DomainBox(BaseModel):
    """Axis-aligned box over the input space (full domain or observation window)"""
    model_config = ConfigDict(frozen=True)

    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def check_bounds(self) -> "DomainBox":
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower and upper must be non-empty and of equal length")
        for d, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not lo < hi:
                raise ValueError(f"dimension {d}: lower must be < upper")
        return self

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    def contains(self, other: "DomainBox") -> bool:
        """True when `other` lies inside this box"""
        if other.dim != self.dim:
            return False
        return all(
            lo <= olo and ohi <= hi
            for lo, hi, olo, ohi in zip(self.lower, self.upper, other.lower, other.upper)
        )

    def contains_points(self, points: np.ndarray) -> bool:
        lower, upper = self.bounds()
        points = np.atleast_2d(points)
        return bool(np.all((points >= lower) & (points <= upper)))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform draws on the half-open box (lower, upper]"""
        lower, upper = self.bounds()
        unit = 1.0 - rng.random((n, self.dim))
        return lower + (upper - lower) * unit

    def normalize(self, points: np.ndarray) -> np.ndarray:
        """Affine map of each dimension onto [0, 1]"""
        lower, upper = self.bounds()
        return (np.asarray(points, dtype=float) - lower) / (upper - lower)

    def denormalize(self, points: np.ndarray) -> np.ndarray:
        lower, upper = self.bounds()
        return lower + np.asarray(points, dtype=float) * (upper - lower)


# Training configuration
class TrainConfig(BaseModel):
    """Optimizer settings for one fit"""
    epochs: int = Field(3000, ge=1)
    step_size: float = Field(1e-3, gt=0)
    batch: Union[int, Literal["full"]] = "full"
    seed: int = 0
    tolerance: float = Field(0.0, ge=0)  # relative plateau threshold, 0 disables early stop
    patience: int = Field(200, ge=1)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)

    @model_validator(mode="after")
    def check_batch(self) -> "TrainConfig":
        if isinstance(self.batch, int) and self.batch < 1:
            raise ValueError("batch must be >= 1 or 'full'")
        return self


def grid_points(step: float) -> np.ndarray:
    """λ grid {0, step, …, 1}; the step must divide 1"""
    count = int(round(1.0 / step))
    if count < 1 or abs(count * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} does not divide [0, 1]")
    return np.round(np.linspace(0.0, 1.0, count + 1), 10)


# Run configuration
class RunConfig(BaseModel):
    """JSON run configuration with defaults mirroring the experimental setup"""
    benchmark: Literal["env", "piston"] = "env"
    window: str = "1"
    windows: Dict[str, DomainBox] = Field(default_factory=dict)  # overrides by window id
    study_windows: List[str] = Field(default_factory=lambda: ["1", "2", "3", "4"])

    # Landmarks
    contexts: int = Field(5, ge=1)
    clusters: Optional[int] = Field(None, ge=1)
    rho: float = Field(0.2, gt=0, lt=1)
    fuzzifier: float = Field(2.0, gt=1)
    fcm_tol: float = Field(1e-6, gt=0)
    fcm_max_iter: int = Field(300, ge=1)

    # Model and sweep
    hidden: int = Field(64, ge=1)
    grid_step: float = Field(0.02, gt=0, le=1)
    noise_grid_step: Optional[float] = Field(None, gt=0, le=1)
    train: TrainConfig = Field(default_factory=TrainConfig)

    # Sample sizes
    n_local: int = Field(1000, ge=1)
    n_local_val: int = Field(250, ge=1)
    n_anchors: int = Field(2000, ge=1)
    n_knowledge: int = Field(5000, ge=1)
    n_q2: int = Field(5000, ge=1)
    n_test: int = Field(5000, ge=1)

    # Studies
    width_ratio: float = Field(1.0, ge=0, le=1)
    alpha: float = Field(0.0, ge=0)
    alphas: List[float] = Field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 10)])
    ratios: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    repeats: int = Field(3, ge=1)

    seed: int = 0
    output_dir: Optional[str] = None
    jobs: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_against_benchmark(self) -> "RunConfig":
        from .benchgen import get_benchmark

        bench = get_benchmark(self.benchmark)
        for step in (self.grid_step, self.noise_grid_step):
            if step is not None:
                grid_points(step)
        if not self.alphas or any(a < 0 for a in self.alphas):
            raise ValueError("alphas must be a non-empty list of values >= 0")
        if not self.ratios or any(not 0 <= r <= 1 for r in self.ratios):
            raise ValueError("ratios must be a non-empty list of values in [0, 1]")
        windows = self.resolved_windows()
        for window_id in [self.window, *self.study_windows]:
            if window_id not in windows:
                raise ValueError(f"unknown window '{window_id}' for benchmark {self.benchmark}")
        for window_id, box in windows.items():
            if not bench.domain.contains(box):
                raise ValueError(f"window '{window_id}' is not contained in the full domain")
        if self.n_local < 2:
            raise ValueError("n_local must be >= 2 so that the output span is defined")
        return self

    def resolved_windows(self) -> Dict[str, DomainBox]:
        from .benchgen import get_benchmark

        merged = dict(get_benchmark(self.benchmark).windows)
        merged.update(self.windows)
        return merged

    def window_box(self, window_id: Optional[str] = None) -> DomainBox:
        return self.resolved_windows()[window_id or self.window]

    def cluster_count(self) -> int:
        from .benchgen import get_benchmark

        return self.clusters or get_benchmark(self.benchmark).default_clusters


# Sweep and study records
class SweepRecord(BaseModel):
    """Per-λ training outcome"""
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    q1: float
    q2: float
    q_total: float
    valid: bool = True
    params_ref: str = ""

    @model_validator(mode="after")
    def check_total(self) -> "SweepRecord":
        if self.valid and not math.isclose(self.q_total, self.q1 + self.q2, rel_tol=0, abs_tol=1e-12):
            raise ValueError("q_total must equal q1 + q2")
        return self


class StudyCell(BaseModel):
    """One (factor, repeat) outcome of a study"""
    factor: str
    repeat: int
    lambda_opt: float
    dq_abs: float
    dq_pct: float
    q1_kd: float
    q2_kd: float
    q1_base: float
    q2_base: float


class StudySummary(BaseModel):
    """Median / min / max of the study metric for one factor value"""
    factor: str
    median: float
    min: float
    max: float

    @model_validator(mode="after")
    def check_order(self) -> "StudySummary":
        if not self.min <= self.median <= self.max:
            raise ValueError("median must lie within [min, max]")
        return self


class StudyResult(BaseModel):
    """Aggregated outcome of a window, noise or width study"""
    study: Literal["windows", "noise", "width"]
    benchmark: str
    metric: Literal["dq_pct", "lambda_opt"]
    repeats: int = Field(ge=1)
    cells: List[StudyCell]
    summaries: List[StudySummary]
    trend: Optional[float] = None  # Spearman ρ between factor and median λ_opt
