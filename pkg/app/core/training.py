"""Fitting under the augmented loss, λ sweeps and validation objectives"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .benchgen import LabeledDataset
from .errors import DivergenceError, DomainError, UndefinedRelativeError
from .landmarks import KnowledgeLandmark
from .models import SweepRecord, TrainConfig, grid_points
from .network import ModelParameters, forward, init_parameters
from .objective import ObjectiveConfig, loss_and_gradient

logger = logging.getLogger(__name__)


@dataclass
class FitResult:
    """Best-loss parameters with the per-epoch loss trace"""
    params: ModelParameters
    trace: List[Tuple[int, float, float, float]]  # (epoch, L, L_data, L_knowledge)
    best_epoch: int
    best_loss: float


@dataclass
class SweepData:
    """Shared read-only inputs of one sweep, all inputs on the normalized unit box"""
    train: LabeledDataset
    val_local: LabeledDataset
    val_global: LabeledDataset
    anchors: np.ndarray
    landmarks: Sequence[KnowledgeLandmark]
    y_span: float
    hidden: int = 64


@dataclass
class SweepResult:
    """Records in λ order, the selected λ and the fits they came from"""
    records: List[SweepRecord]
    lambda_opt: Optional[float]
    fits: List[Optional[FitResult]] = field(default_factory=list, repr=False)

    def record_at(self, lam: float) -> SweepRecord:
        for record in self.records:
            if abs(record.lam - lam) < 1e-9:
                return record
        raise KeyError(f"no record at lambda={lam}")

    def fit_at(self, lam: float) -> Optional[FitResult]:
        for record, fit in zip(self.records, self.fits):
            if abs(record.lam - lam) < 1e-9:
                return fit
        return None


def fit(init: ModelParameters, dataset: LabeledDataset, cfg: ObjectiveConfig, tc: TrainConfig) -> FitResult:
    """Adaptive-moment descent on L(a; λ); returns the best-loss iterate"""
    params = init.copy()
    theta = params.flatten()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    rng = np.random.default_rng(tc.seed)

    best_theta, best_loss, best_epoch = theta.copy(), np.inf, 0
    trace: List[Tuple[int, float, float, float]] = []
    window_best = np.inf

    for epoch in range(1, tc.epochs + 1):
        batch = dataset
        if tc.batch != "full" and tc.batch < len(dataset):
            idx = np.sort(rng.choice(len(dataset), size=tc.batch, replace=False))
            batch = replace(dataset, inputs=dataset.inputs[idx], targets=dataset.targets[idx])

        current = ModelParameters.from_flat(theta, params.n_inputs, params.n_hidden)
        loss, l_data, l_know, grad = loss_and_gradient(current, batch, cfg)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        trace.append((epoch, loss, l_data, l_know))
        if loss < best_loss:
            best_theta, best_loss, best_epoch = theta.copy(), loss, epoch
        if epoch % 500 == 0:
            logger.debug(f"lambda={cfg.lam:.2f} epoch {epoch}: L={loss:.6g} Ld={l_data:.6g} Lk={l_know:.6g}")

        if tc.tolerance > 0 and epoch % tc.patience == 0:
            if np.isfinite(window_best) and window_best - best_loss <= tc.tolerance * abs(window_best):
                logger.debug(f"lambda={cfg.lam:.2f}: plateau at epoch {epoch}")
                break
            window_best = best_loss

        g = grad.flatten()
        m = tc.beta1 * m + (1.0 - tc.beta1) * g
        v = tc.beta2 * v + (1.0 - tc.beta2) * g ** 2
        m_hat = m / (1.0 - tc.beta1 ** epoch)
        v_hat = v / (1.0 - tc.beta2 ** epoch)
        theta = theta - tc.step_size * m_hat / (np.sqrt(v_hat) + tc.epsilon)

    best = ModelParameters.from_flat(best_theta, params.n_inputs, params.n_hidden)
    return FitResult(best, trace, best_epoch, float(best_loss))


def _mse(params: ModelParameters, dataset: LabeledDataset) -> float:
    if len(dataset) == 0:
        raise DomainError("validation split is empty")
    return float(np.mean((forward(params, dataset.inputs) - dataset.targets) ** 2))


def q1(params: ModelParameters, val_local: LabeledDataset) -> float:
    """Mean squared error on the held-out local split"""
    return _mse(params, val_local)


def q2(params: ModelParameters, val_global: LabeledDataset) -> float:
    """Mean squared error against f(x; w) samples over the full domain"""
    return _mse(params, val_global)


def _fit_lambda(args) -> Tuple[SweepRecord, Optional[FitResult]]:
    lam, data, init, tc = args
    ref = f"lambda_{lam:.2f}"
    try:
        cfg = ObjectiveConfig(lam, data.y_span, data.anchors, data.landmarks)
        result = fit(init, data.train, cfg, tc)
    except DivergenceError as e:
        logger.warning(f"Fit at lambda={lam:.2f} diverged: {e}")
        nan = float("nan")
        return SweepRecord(lam=lam, q1=nan, q2=nan, q_total=nan, valid=False, params_ref=ref), None
    a, b = q1(result.params, data.val_local), q2(result.params, data.val_global)
    return SweepRecord(lam=lam, q1=a, q2=b, q_total=a + b, valid=True, params_ref=ref), result


def select_lambda(records: Sequence[SweepRecord]) -> Optional[float]:
    """argmin of Q₁+Q₂ over valid records, ties toward the larger λ"""
    best: Optional[SweepRecord] = None
    for record in sorted(records, key=lambda r: r.lam, reverse=True):
        if record.valid and (best is None or record.q_total < best.q_total):
            best = record
    return None if best is None else best.lam


def sweep(grid_step: float, data: SweepData, tc: TrainConfig, jobs: int = 1) -> SweepResult:
    """One fit per λ on the grid, all from the same seeded initialization"""
    try:
        grid = grid_points(grid_step)
    except ValueError as e:
        raise DomainError(str(e)) from None
    init = init_parameters(data.train.dim, data.hidden, np.random.default_rng(tc.seed))
    tasks = [(float(lam), data, init, tc) for lam in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_fit_lambda, tasks))
    else:
        outcomes = [_fit_lambda(task) for task in tasks]

    records = [record for record, _ in outcomes]
    fits = [fit_result for _, fit_result in outcomes]
    invalid = [r.lam for r in records if not r.valid]
    if invalid:
        logger.warning(f"Excluded {len(invalid)} diverged fits from selection: {invalid}")
    lambda_opt = select_lambda(records)
    logger.info(f"Sweep over {len(grid)} lambda values: lambda_opt={lambda_opt}")
    return SweepResult(records, lambda_opt, fits)


def delta_q(record_base: SweepRecord, record_opt: SweepRecord) -> Tuple[float, float]:
    """(Q_base − Q_opt, 100·ΔQ/Q_base)"""
    if not (record_base.valid and record_opt.valid):
        raise DomainError("delta_q needs valid records")
    absolute = record_base.q_total - record_opt.q_total
    if record_base.q_total == 0:
        raise UndefinedRelativeError("baseline objective is zero")
    return absolute, 100.0 * absolute / record_base.q_total


def evaluate_test_phase(params: ModelParameters, test_local: LabeledDataset, test_global: LabeledDataset) -> Tuple[float, float, float]:
    """Q₁, Q₂ and their sum on independently drawn test samples"""
    a, b = q1(params, test_local), q2(params, test_global)
    return a, b, a + b


