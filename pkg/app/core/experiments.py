"""Window, noise and width studies built on the data → landmarks → sweep pipeline"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from .benchgen import LabeledDataset, get_benchmark, inject_noise, sample_knowledge, sample_local
from .errors import KDError
from .landmarks import LandmarkSet, build_landmarks
from .models import RunConfig, StudyCell, StudyResult, StudySummary
from .objective import output_span
from .training import SweepData, SweepResult, delta_q, sweep

logger = logging.getLogger(__name__)

# Random stream keys; every stochastic input draws from default_rng([seed, key, ...])
LOCAL, KNOWLEDGE, VALIDATION, TEST_LOCAL, TEST_GLOBAL, ANCHORS, NOISE, LANDMARKS = range(1, 9)


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


@dataclass
class RunData:
    """Every dataset one sweep needs, inputs in benchmark units"""
    train: LabeledDataset
    val_local: LabeledDataset
    knowledge: LabeledDataset
    val_global: LabeledDataset
    test_local: LabeledDataset
    test_global: LabeledDataset
    anchors: np.ndarray
    window_id: str
    r: float
    alpha: float
    seed: int


def generate_local(cfg: RunConfig, window_id: str, seed: int) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Train / validation / test samples on an observation window at the fixed parameters"""
    bench = get_benchmark(cfg.benchmark)
    window = cfg.window_box(window_id)
    local = sample_local(window, cfg.n_local + cfg.n_local_val, bench.baseline, cfg.benchmark, stream(seed, LOCAL), seed)
    train, val_local = local.split(cfg.n_local)
    test_local = sample_local(window, cfg.n_local_val, bench.baseline, cfg.benchmark, stream(seed, TEST_LOCAL), seed)
    for dataset in (train, val_local, test_local):
        dataset.meta.update(window=window_id, r=0.0, alpha=0.0)
    return train, val_local, test_local


def generate_global(cfg: RunConfig, r: float, seed: int) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Knowledge, Q₂ validation and test samples over the full domain at width ratio r"""
    bench = get_benchmark(cfg.benchmark)
    knowledge = sample_knowledge(bench.domain, cfg.n_knowledge, bench.specs, r, cfg.benchmark, stream(seed, KNOWLEDGE), seed)
    val_global = sample_knowledge(bench.domain, cfg.n_q2, bench.specs, r, cfg.benchmark, stream(seed, VALIDATION), seed)
    test_global = sample_knowledge(bench.domain, cfg.n_test, bench.specs, r, cfg.benchmark, stream(seed, TEST_GLOBAL), seed)
    return knowledge, val_global, test_global


def generate_run_data(cfg: RunConfig, window_id: Optional[str] = None, r: Optional[float] = None, seed: Optional[int] = None, alpha: Optional[float] = None) -> RunData:
    """Datasets and frozen anchors for one sweep; noise, if any, goes into the training split only"""
    window_id = window_id or cfg.window
    r = cfg.width_ratio if r is None else r
    seed = cfg.seed if seed is None else seed
    alpha = cfg.alpha if alpha is None else alpha
    bench = get_benchmark(cfg.benchmark)

    train, val_local, test_local = generate_local(cfg, window_id, seed)
    knowledge, val_global, test_global = generate_global(cfg, r, seed)
    anchors = bench.domain.sample(cfg.n_anchors, stream(seed, ANCHORS))
    data = RunData(train, val_local, knowledge, val_global, test_local, test_global, anchors, window_id, r, 0.0, seed)
    return add_noise(data, alpha, stream(seed, NOISE)) if alpha > 0 else data


def add_noise(data: RunData, alpha: float, rng: np.random.Generator) -> RunData:
    """Copy of `data` with a noisy training split; clean splits untouched"""
    return replace(data, train=inject_noise(data.train, alpha, rng), alpha=alpha)


def build_run_landmarks(cfg: RunConfig, knowledge: LabeledDataset, seed: int, jobs: int = 1) -> LandmarkSet:
    bench = get_benchmark(cfg.benchmark)
    return build_landmarks(
        knowledge,
        bench.domain,
        C=cfg.contexts,
        K=cfg.cluster_count(),
        rho=cfg.rho,
        m=cfg.fuzzifier,
        tol=cfg.fcm_tol,
        max_iter=cfg.fcm_max_iter,
        seed=[seed, LANDMARKS],
        jobs=jobs,
    )


def sweep_inputs(cfg: RunConfig, data: RunData, landmarks: LandmarkSet) -> SweepData:
    """Normalize inputs onto the unit box of Ω and bundle the shared sweep inputs"""
    domain = landmarks.domain
    return SweepData(
        train=data.train.normalized(domain),
        val_local=data.val_local.normalized(domain),
        val_global=data.val_global.normalized(domain),
        anchors=domain.normalize(data.anchors),
        landmarks=landmarks.landmarks,
        y_span=output_span(data.train.targets),
        hidden=cfg.hidden,
    )


def run_sweep(cfg: RunConfig, data: RunData, landmarks: LandmarkSet, grid_step: Optional[float] = None, jobs: int = 1) -> SweepResult:
    tc = cfg.train.model_copy(update={"seed": data.seed})
    return sweep(grid_step or cfg.grid_step, sweep_inputs(cfg, data, landmarks), tc, jobs)


def cell_outcome(factor: str, repeat: int, result: SweepResult) -> StudyCell:
    """λ_opt and ΔQ of a sweep against its λ = 1 baseline"""
    if result.lambda_opt is None:
        raise KDError(f"every fit diverged for factor {factor}, repeat {repeat}")
    base = result.record_at(1.0)
    opt = result.record_at(result.lambda_opt)
    dq_abs, dq_pct = delta_q(base, opt)
    return StudyCell(
        factor=factor,
        repeat=repeat,
        lambda_opt=result.lambda_opt,
        dq_abs=dq_abs,
        dq_pct=dq_pct,
        q1_kd=opt.q1,
        q2_kd=opt.q2,
        q1_base=base.q1,
        q2_base=base.q2,
    )


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Rank correlation, None when either side is constant or too short"""
    if len(x) < 2 or len(set(x)) < 2 or len(set(y)) < 2:
        return None
    rho = spearmanr(x, y).statistic
    return None if np.isnan(rho) else float(rho)


def summarize(cells: Sequence[StudyCell], factors: Sequence[str], metric: str) -> List[StudySummary]:
    summaries = []
    for factor in factors:
        values = np.array([getattr(c, metric) for c in cells if c.factor == factor])
        summaries.append(StudySummary(factor=factor, median=float(np.median(values)), min=float(values.min()), max=float(values.max())))
    return summaries


def _run_cells(job: Callable, tasks: list, jobs: int) -> List[StudyCell]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(job, tasks))
    return [job(task) for task in tasks]


# Window study
def _window_cell(task) -> StudyCell:
    cfg, window_id, repeat = task
    seed = cfg.seed + repeat
    data = generate_run_data(cfg, window_id=window_id, seed=seed, alpha=0.0)
    landmarks = build_run_landmarks(cfg, data.knowledge, seed)
    cell = cell_outcome(window_id, repeat, run_sweep(cfg, data, landmarks))
    logger.info(f"Window {window_id} repeat {repeat}: lambda_opt={cell.lambda_opt:.2f} dQ={cell.dq_pct:.2f}%")
    return cell


def window_study(cfg: RunConfig, window_ids: Optional[Sequence[str]] = None, repeats: Optional[int] = None, jobs: int = 1) -> StudyResult:
    """Full sweep per observation window; ΔQ% against the data-only model"""
    window_ids = list(window_ids or cfg.study_windows)
    repeats = repeats or cfg.repeats
    tasks = [(cfg, w, rep) for w in window_ids for rep in range(repeats)]
    cells = _run_cells(_window_cell, tasks, jobs)
    return StudyResult(
        study="windows",
        benchmark=cfg.benchmark,
        metric="dq_pct",
        repeats=repeats,
        cells=cells,
        summaries=summarize(cells, window_ids, "dq_pct"),
    )


# Noise study
def _noise_cell(task) -> StudyCell:
    cfg, clean, landmarks, alpha_index, alpha, repeat = task
    data = add_noise(clean, alpha, stream(cfg.seed, NOISE, alpha_index, repeat))
    grid_step = cfg.noise_grid_step or cfg.grid_step
    cell = cell_outcome(f"{alpha:g}", repeat, run_sweep(cfg, data, landmarks, grid_step))
    logger.info(f"Noise alpha={alpha:g} repeat {repeat}: lambda_opt={cell.lambda_opt:.2f}")
    return cell


def noise_study(cfg: RunConfig, alphas: Optional[Sequence[float]] = None, repeats: Optional[int] = None, jobs: int = 1) -> StudyResult:
    """λ_opt under increasing label noise; clean data and landmarks are fixed across cells"""
    alphas = list(alphas or cfg.alphas)
    repeats = repeats or cfg.repeats
    clean = generate_run_data(cfg, alpha=0.0)
    landmarks = build_run_landmarks(cfg, clean.knowledge, cfg.seed, jobs)
    tasks = [(cfg, clean, landmarks, i, a, rep) for i, a in enumerate(alphas) for rep in range(repeats)]
    cells = _run_cells(_noise_cell, tasks, jobs)
    factors = [f"{a:g}" for a in alphas]
    summaries = summarize(cells, factors, "lambda_opt")
    return StudyResult(
        study="noise",
        benchmark=cfg.benchmark,
        metric="lambda_opt",
        repeats=repeats,
        cells=cells,
        summaries=summaries,
        trend=spearman(alphas, [s.median for s in summaries]),
    )


# Width study
def _width_cell(task) -> StudyCell:
    cfg, r, repeat = task
    seed = cfg.seed + repeat
    data = generate_run_data(cfg, r=r, seed=seed, alpha=0.0)
    landmarks = build_run_landmarks(cfg, data.knowledge, seed)
    cell = cell_outcome(f"{r:g}", repeat, run_sweep(cfg, data, landmarks))
    logger.info(f"Width r={r:g} repeat {repeat}: lambda_opt={cell.lambda_opt:.2f}")
    return cell


def width_study(cfg: RunConfig, ratios: Optional[Sequence[float]] = None, repeats: Optional[int] = None, jobs: int = 1) -> StudyResult:
    """λ_opt as the parameter sampling width grows; knowledge, landmarks and Q₂ sets rebuilt per r"""
    ratios = list(ratios if ratios is not None else cfg.ratios)
    repeats = repeats or cfg.repeats
    tasks = [(cfg, r, rep) for r in ratios for rep in range(repeats)]
    cells = _run_cells(_width_cell, tasks, jobs)
    factors = [f"{r:g}" for r in ratios]
    summaries = summarize(cells, factors, "lambda_opt")
    return StudyResult(
        study="width",
        benchmark=cfg.benchmark,
        metric="lambda_opt",
        repeats=repeats,
        cells=cells,
        summaries=summaries,
        trend=spearman(ratios, [s.median for s in summaries]),
    )
