"""Knowledge landmarks: output contexts, conditional FCM and granule elevation"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .errors import AssemblyError, ConfigurationError, ContextEmptyError, DegenerateClusterError, DomainError
from .granulation import GaussianGranule, WeightedSample, gaussian_specificity, optimize_width
from .models import DomainBox

logger = logging.getLogger(__name__)

# Membership mass below this is treated as absent
MASS_EPS = 1e-12


@dataclass(frozen=True)
class OutputContext:
    """Output-space granule B_i with its 1-based index"""
    granule: GaussianGranule
    index: int


@dataclass(frozen=True)
class InputGranule:
    """Product t-norm of per-dimension Gaussian granules on normalized inputs"""
    granules: Tuple[GaussianGranule, ...]
    provenance: Tuple[int, int] = (0, 0)  # (context i, cluster j), 1-based

    @property
    def prototype(self) -> np.ndarray:
        return np.array([g.center for g in self.granules])

    @property
    def spreads(self) -> np.ndarray:
        return np.array([g.spread for g in self.granules])

    def membership(self, x) -> np.ndarray:
        """A(x) = Π_d μ^(d)(x^(d)); accepts one vector or an (N, n) batch"""
        x = np.asarray(x, dtype=float)
        diff = (x - self.prototype) / self.spreads
        value = np.exp(-np.sum(diff ** 2, axis=-1))
        return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class KnowledgeLandmark:
    """Paired input and output granules (A_ℓ, B_ℓ)"""
    input: InputGranule
    output: GaussianGranule
    output_specificity: float


@dataclass
class FcmResult:
    """Conditional FCM outcome for one context"""
    prototypes: np.ndarray       # (K, n)
    memberships: np.ndarray      # (K, N), slice u[i, :, :] of the partition tensor
    objective: List[float]       # J_i after every iteration
    residuals: List[float]       # max_k |Σ_j u_jk − B_i(y_k)| after every iteration
    iterations: int


@dataclass
class LandmarkSet:
    """Contexts, landmarks and the normalization box they were built on"""
    contexts: List[OutputContext]
    landmarks: List[KnowledgeLandmark]
    domain: DomainBox
    diagnostics: List[Dict[str, object]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.landmarks)

    def to_dict(self) -> Dict[str, object]:
        return {
            "domain": {"lower": list(self.domain.lower), "upper": list(self.domain.upper)},
            "contexts": [{"index": c.index, **c.granule.to_dict()} for c in self.contexts],
            "landmarks": [
                {
                    "input": {
                        "centers": [float(v) for v in lm.input.prototype],
                        "spreads": [float(v) for v in lm.input.spreads],
                    },
                    "output": {
                        "center": lm.output.center,
                        "spread": lm.output.spread,
                        "calibration_range": lm.output.calibration_range,
                        "specificity": lm.output_specificity,
                    },
                    "provenance": list(lm.input.provenance),
                }
                for lm in self.landmarks
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "LandmarkSet":
        contexts = [
            OutputContext(GaussianGranule.from_dict(item), int(item["index"]))
            for item in data["contexts"]
        ]
        landmarks = []
        for item in data["landmarks"]:
            granules = tuple(
                GaussianGranule(float(c), float(s))
                for c, s in zip(item["input"]["centers"], item["input"]["spreads"])
            )
            out = item["output"]
            output = GaussianGranule(
                float(out["center"]), float(out["spread"]), float(out.get("calibration_range", 1.0)), "native"
            )
            landmarks.append(
                KnowledgeLandmark(
                    InputGranule(granules, tuple(int(v) for v in item["provenance"])),
                    output,
                    float(out["specificity"]),
                )
            )
        return cls(contexts, landmarks, DomainBox(**data["domain"]))


# Output contexts
def build_output_contexts(targets: Sequence[float], C: int, rho: float) -> List[OutputContext]:
    """C Gaussian contexts on [P2.5, P97.5] with κ-nearest-neighbour spreads, κ = ⌈ρN⌉"""
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if C < 1:
        raise ConfigurationError("C must be >= 1")
    if not 0 < rho < 1:
        raise ConfigurationError("rho must lie in (0, 1)")
    if targets.size < C:
        raise ConfigurationError(f"need at least C={C} targets, got {targets.size}")

    low, high = np.percentile(targets, [2.5, 97.5])
    in_range = targets[(targets >= low) & (targets <= high)]
    kappa = math.ceil(rho * in_range.size)
    if in_range.size == 0 or kappa < 1 or in_range.size < kappa:
        raise ConfigurationError(f"too few in-range samples ({in_range.size}) for kappa={kappa}")

    centers = np.array([0.5 * (low + high)]) if C == 1 else np.linspace(low, high, C)
    calibration = float(high - low) if high > low else 1.0
    floor = MASS_EPS * max(1.0, calibration)

    contexts = []
    for i, center in enumerate(centers, start=1):
        distances = np.sort(np.abs(in_range - center))
        spread = float(distances[kappa - 1])
        if spread <= floor:
            logger.warning(f"Context {i}: zero κ-NN distance, spread clamped to {floor:.3g}")
            spread = floor
        contexts.append(OutputContext(GaussianGranule(float(center), spread, calibration, "native"), i))
    return contexts


# Conditional FCM
def _memberships(X: np.ndarray, prototypes: np.ndarray, mass: np.ndarray, m: float) -> np.ndarray:
    """Context-constrained partition update; columns sum to `mass`"""
    d2 = np.sum((X[None, :, :] - prototypes[:, None, :]) ** 2, axis=2)   # (K, N)
    coincident = d2 < settings.coincidence_radius ** 2
    safe = np.where(coincident, 1.0, d2)
    # d^(-2/(m-1)) in log space, shifted per sample to stay finite for m near 1
    logs = -np.log(safe) / (m - 1.0)
    inv = np.exp(logs - logs.max(axis=0))
    u = mass * inv / inv.sum(axis=0)

    hits = coincident.any(axis=0)
    if hits.any():
        winner = np.argmax(coincident, axis=0)
        u[:, hits] = 0.0
        u[winner[hits], np.flatnonzero(hits)] = mass[hits]
    return u


def _prototypes(X: np.ndarray, u: np.ndarray, m: float, previous: np.ndarray) -> np.ndarray:
    um = u ** m
    weight = um.sum(axis=1)
    updated = previous.copy()
    live = weight > 0
    updated[live] = (um[live] @ X) / weight[live, None]
    return updated


def _objective(X: np.ndarray, u: np.ndarray, prototypes: np.ndarray, m: float) -> float:
    d2 = np.sum((X[None, :, :] - prototypes[:, None, :]) ** 2, axis=2)
    return float(np.sum(u ** m * d2))


def conditional_fcm(
    X: np.ndarray,
    y_memberships: np.ndarray,
    K: int,
    m: float = 2.0,
    tol: float = 1e-6,
    max_iter: int = 300,
    rng: Optional[np.random.Generator] = None,
) -> FcmResult:
    """Fuzzy C-means whose per-sample membership mass equals the context degree B_i(y_k)"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mass = np.asarray(y_memberships, dtype=float).reshape(-1)
    rng = rng or np.random.default_rng()
    if K < 1:
        raise ConfigurationError("K must be >= 1")
    if not m > 1:
        raise ConfigurationError("fuzzifier m must be > 1")
    if mass.shape[0] != X.shape[0]:
        raise DomainError("one context membership per sample is required")
    if mass.sum() <= MASS_EPS:
        raise ContextEmptyError("context carries no membership mass")
    support = np.count_nonzero(mass > MASS_EPS)
    if support < K:
        raise ConfigurationError(f"only {support} samples with positive context membership for K={K}")

    # membership-weighted seeding
    p = np.where(mass > MASS_EPS, mass, 0.0)
    seeds = rng.choice(X.shape[0], size=K, replace=False, p=p / p.sum())
    prototypes = X[np.sort(seeds)].copy()

    objective: List[float] = []
    residuals: List[float] = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        u = _memberships(X, prototypes, mass, m)
        updated = _prototypes(X, u, m, prototypes)
        displacement = float(np.max(np.abs(updated - prototypes)))
        prototypes = updated
        objective.append(_objective(X, u, prototypes, m))
        residuals.append(float(np.max(np.abs(u.sum(axis=0) - mass))))
        logger.debug(f"FCM iteration {iterations}: J={objective[-1]:.10g} displacement={displacement:.3g}")
        if displacement < tol:
            break

    return FcmResult(prototypes, u, objective, residuals, iterations)


# Elevation and assembly
def elevate_prototype(prototype: np.ndarray, memberships: np.ndarray, X: np.ndarray, m: float, provenance: Tuple[int, int] = (0, 0)) -> InputGranule:
    """Per-dimension justifiable width around the prototype, combined by product t-norm"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    um = np.asarray(memberships, dtype=float) ** m
    total = um.sum()
    if not total > 0:
        raise DegenerateClusterError(f"cluster {provenance} has zero support weight")
    weights = um / total
    granules = tuple(
        GaussianGranule(float(prototype[d]), optimize_width(float(prototype[d]), WeightedSample(X[:, d], weights)))
        for d in range(X.shape[1])
    )
    return InputGranule(granules, provenance)


def assemble_landmarks(contexts: Sequence[OutputContext], granules: Sequence[Sequence[InputGranule]], K: int) -> List[KnowledgeLandmark]:
    """Flatten per-context granules into c = C·K landmarks"""
    if len(granules) != len(contexts):
        raise AssemblyError(f"expected granules for {len(contexts)} contexts, got {len(granules)}")
    landmarks = []
    for context, group in zip(contexts, granules):
        if len(group) != K:
            raise AssemblyError(f"context {context.index} has {len(group)} granules, expected {K}")
        specificity = gaussian_specificity(context.granule)
        landmarks.extend(KnowledgeLandmark(a, context.granule, specificity) for a in group)
    return landmarks


def _context_job(args) -> Tuple[List[InputGranule], Dict[str, object]]:
    X, mass, index, K, m, tol, max_iter, seed_seq = args
    result = conditional_fcm(X, mass, K, m, tol, max_iter, np.random.default_rng(seed_seq))
    granules = [
        elevate_prototype(result.prototypes[j], result.memberships[j], X, m, (index, j + 1))
        for j in range(K)
    ]
    diagnostics = {
        "context": index,
        "iterations": result.iterations,
        "objective": result.objective,
        "max_residual": max(result.residuals),
    }
    return granules, diagnostics


def build_landmarks(
    knowledge,
    domain: DomainBox,
    C: int,
    K: int,
    rho: float = 0.2,
    m: float = 2.0,
    tol: float = 1e-6,
    max_iter: int = 300,
    seed: Union[int, Sequence[int]] = 0,
    jobs: int = 1,
) -> LandmarkSet:
    """Full landmark construction from a full-domain knowledge dataset (native units)"""
    contexts = build_output_contexts(knowledge.targets, C, rho)
    X = domain.normalize(knowledge.inputs)
    streams = np.random.SeedSequence(seed).spawn(len(contexts))
    jobs_args = [
        (X, ctx.granule.membership(knowledge.targets), ctx.index, K, m, tol, max_iter, stream)
        for ctx, stream in zip(contexts, streams)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_context_job, jobs_args))
    else:
        outcomes = [_context_job(args) for args in jobs_args]

    granules = [granules for granules, _ in outcomes]
    diagnostics = [diag for _, diag in outcomes]
    landmarks = assemble_landmarks(contexts, granules, K)
    logger.info(f"Built {len(landmarks)} landmarks from {len(knowledge)} samples (C={C}, K={K})")
    return LandmarkSet(contexts, landmarks, domain, diagnostics)
