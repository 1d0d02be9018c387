"""Closed-form physics benchmarks and dataset generation

Two benchmarks are provided: environmental pollutant dispersion (inputs s, t)
and piston cycle time (inputs ξ, Γ). Every sampling routine takes an explicit
``numpy.random.Generator`` and is reproducible under a fixed seed.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .config import settings
from .errors import ConfigurationError, DomainError, EvaluationError
from .models import DomainBox, ParameterSpec

logger = logging.getLogger(__name__)


@dataclass
class LabeledDataset:
    """Input vectors with numeric targets (benchmark units unless normalized)"""
    inputs: np.ndarray
    targets: np.ndarray
    seed: Optional[int] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.asarray(self.targets, dtype=float).reshape(-1)
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise DomainError("inputs and targets must have the same length")

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    @property
    def dim(self) -> int:
        return int(self.inputs.shape[1])

    def normalized(self, domain: DomainBox) -> "LabeledDataset":
        """Copy with inputs mapped onto the unit box of `domain`"""
        return replace(self, inputs=domain.normalize(self.inputs), meta={**self.meta, "normalized": True})

    def split(self, n_first: int) -> tuple["LabeledDataset", "LabeledDataset"]:
        """Split into the first `n_first` samples and the rest"""
        if not 0 < n_first < len(self):
            raise DomainError(f"cannot split {len(self)} samples at {n_first}")
        head = replace(self, inputs=self.inputs[:n_first], targets=self.targets[:n_first], meta=dict(self.meta))
        tail = replace(self, inputs=self.inputs[n_first:], targets=self.targets[n_first:], meta=dict(self.meta))
        return head, tail


# Closed forms
def env_response(s, t, w: Sequence[float]):
    """Scaled concentration f(s, t) = sqrt(4π C(s, t)) of the two-source spill model

    w = (R, Y, L, τ): spilled mass, diffusion rate, second-spill location and time.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    R, Y, L, tau = (np.asarray(v, dtype=float) for v in w)
    if np.any(t <= 0):
        raise DomainError("t must be > 0")

    first = R / np.sqrt(4.0 * np.pi * Y * t) * np.exp(-(s ** 2) / (4.0 * Y * t))

    active = t > tau
    dt = np.maximum(t - tau, settings.min_time_offset)
    second = R / np.sqrt(4.0 * np.pi * Y * dt) * np.exp(-((s - L) ** 2) / (4.0 * Y * dt))
    concentration = first + np.where(active, second, 0.0)

    if not np.all(np.isfinite(concentration)):
        raise EvaluationError("C", "concentration overflowed")
    result = np.sqrt(4.0 * np.pi * concentration)
    return float(result) if result.ndim == 0 else result


def piston_force(xi, gamma, w: Sequence[float]):
    """Force term A = P₀Γ + 19.62ξ − kV₀/Γ"""
    V0, k, P0, _, _ = (np.asarray(v, dtype=float) for v in w)
    return P0 * gamma + 19.62 * xi - k * V0 / gamma


def piston_volume(xi, gamma, w: Sequence[float]):
    """Gas volume V = Γ/(2k)·(sqrt(A² + 4kP₀V₀T_a/T₀) − A)"""
    V0, k, P0, Ta, T0 = (np.asarray(v, dtype=float) for v in w)
    A = piston_force(xi, gamma, w)
    radicand = A ** 2 + 4.0 * k * P0 * V0 * Ta / T0
    if np.any(radicand < 0):
        raise EvaluationError("radicand", "negative value under the square root")
    V = gamma / (2.0 * k) * (np.sqrt(radicand) - A)
    if np.any(V <= 0):
        raise EvaluationError("V", "non-positive gas volume")
    return V


def piston_response(xi, gamma, w: Sequence[float]):
    """Cycle time ψ(ξ, Γ) in seconds; w = (V₀, k, P₀, T_a, T₀)"""
    xi = np.asarray(xi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    V0, k, P0, Ta, T0 = (np.asarray(v, dtype=float) for v in w)
    if np.any(gamma <= 0):
        raise DomainError("surface area must be > 0")
    if np.any(k <= 0):
        raise DomainError("spring coefficient must be > 0")

    V = piston_volume(xi, gamma, w)
    stiffness = k + gamma ** 2 * P0 * V0 * Ta / (T0 * V ** 2)
    ratio = xi / stiffness
    if np.any(ratio < 0):
        raise EvaluationError("stiffness", "negative value under the square root")
    result = 2.0 * np.pi * np.sqrt(ratio)
    return float(result) if result.ndim == 0 else result


# Benchmark registry
@dataclass(frozen=True)
class Benchmark:
    """Closed-form model together with its domain, parameter ranges and windows"""
    id: str
    input_names: List[str]
    domain: DomainBox
    specs: List[ParameterSpec]
    baseline: List[float]
    windows: Dict[str, DomainBox]
    default_clusters: int
    response: Callable

    def evaluate(self, inputs: np.ndarray, w) -> np.ndarray:
        """Response at (N, 2) inputs under one vector or an (N, p) matrix of parameters"""
        inputs = np.atleast_2d(inputs)
        w = np.asarray(w, dtype=float)
        columns = w.T if w.ndim == 2 else w
        return np.asarray(self.response(inputs[:, 0], inputs[:, 1], columns), dtype=float).reshape(-1)


ENV = Benchmark(
    id="env",
    input_names=["s", "t"],
    domain=DomainBox(lower=[0.0, 0.0], upper=[3.0, 60.0]),
    specs=[
        ParameterSpec(name="R", min=7.0, max=13.0),
        ParameterSpec(name="Y", min=0.02, max=0.12),
        ParameterSpec(name="L", min=0.01, max=3.0),
        ParameterSpec(name="tau", min=30.01, max=30.295),
    ],
    baseline=[10.0, 0.07, 1.505, 30.1525],
    windows={
        "1": DomainBox(lower=[1.0, 20.0], upper=[1.8, 32.0]),
        "2": DomainBox(lower=[2.4, 2.0], upper=[3.0, 12.0]),
        "3": DomainBox(lower=[2.4, 45.0], upper=[3.0, 60.0]),
        "4": DomainBox(lower=[1.2, 30.3], upper=[1.9, 40.0]),
    },
    default_clusters=8,
    response=env_response,
)

PISTON_SPECS = [
    ParameterSpec(name="V0", min=0.002, max=0.010),
    ParameterSpec(name="k", min=1000.0, max=5000.0),
    ParameterSpec(name="P0", min=9.0e4, max=1.1e5),
    ParameterSpec(name="Ta", min=290.0, max=296.0),
    ParameterSpec(name="T0", min=340.0, max=360.0),
]

PISTON = Benchmark(
    id="piston",
    input_names=["xi", "gamma"],
    domain=DomainBox(lower=[30.0, 0.005], upper=[60.0, 0.020]),
    specs=PISTON_SPECS,
    baseline=[spec.center for spec in PISTON_SPECS],
    windows={
        "1": DomainBox(lower=[40.0, 0.010], upper=[45.0, 0.013]),
        "2": DomainBox(lower=[50.0, 0.005], upper=[55.0, 0.008]),
        "3": DomainBox(lower=[50.0, 0.014], upper=[55.0, 0.017]),
        "4": DomainBox(lower=[30.0, 0.014], upper=[35.0, 0.017]),
    },
    default_clusters=5,
    response=piston_response,
)

BENCHMARKS: Dict[str, Benchmark] = {ENV.id: ENV, PISTON.id: PISTON}


def get_benchmark(benchmark_id: str) -> Benchmark:
    """Look up a benchmark by id"""
    try:
        return BENCHMARKS[benchmark_id]
    except KeyError:
        raise ConfigurationError(f"unknown benchmark '{benchmark_id}'") from None


# Sampling
def sample_parameters(specs: Sequence[ParameterSpec], r: float, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
    """Draw w_j ~ U(w̄_j − rΔ_j/2, w̄_j + rΔ_j/2); one vector, or an (n, p) matrix when n is given"""
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"width ratio must lie in [0, 1], got {r}")
    centers = np.array([spec.center for spec in specs])
    widths = np.array([spec.width for spec in specs])
    shape = (len(specs),) if n is None else (n, len(specs))
    return centers + r * widths * (rng.random(shape) - 0.5)


def sample_local(window: DomainBox, n: int, w0: Sequence[float], benchmark: str, rng: np.random.Generator, seed: Optional[int] = None) -> LabeledDataset:
    """n uniform inputs on an observation window, targets at the fixed parameters w0"""
    bench = get_benchmark(benchmark)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not bench.domain.contains(window):
        raise ConfigurationError("observation window is not contained in the full domain")
    inputs = window.sample(n, rng)
    targets = bench.evaluate(inputs, w0)
    return LabeledDataset(inputs, targets, seed=seed, meta={"benchmark": benchmark, "w0": [float(v) for v in w0]})


def sample_knowledge(domain: DomainBox, n: int, specs: Sequence[ParameterSpec], r: float, benchmark: str, rng: np.random.Generator, seed: Optional[int] = None) -> LabeledDataset:
    """n uniform inputs on the full domain, each target under its own parameter draw"""
    bench = get_benchmark(benchmark)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not bench.domain.contains(domain):
        raise ConfigurationError("sampling box is not contained in the full domain")
    inputs = domain.sample(n, rng)
    params = sample_parameters(specs, r, rng, n=n)
    targets = bench.evaluate(inputs, params)
    return LabeledDataset(inputs, targets, seed=seed, meta={"benchmark": benchmark, "r": r})


def inject_noise(data: LabeledDataset, alpha: float, rng: np.random.Generator) -> LabeledDataset:
    """New dataset with targets + N(0, α·std(targets)); inputs are shared unchanged"""
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    meta = {**data.meta, "alpha": alpha}
    if alpha == 0:
        return replace(data, targets=data.targets.copy(), meta=meta)
    spread = float(np.std(data.targets, ddof=1)) if len(data) > 1 else 0.0
    sigma = alpha * spread
    noisy = data.targets + rng.normal(0.0, sigma, size=len(data))
    logger.debug(f"Injected noise alpha={alpha} sigma={sigma:.6g} into {len(data)} targets")
    return replace(data, targets=noisy, meta=meta)
