"""Full-scale study runs; enabled with KD_RUN_SLOW=1

Each study is stored through StudyService under KD_ACCEPTANCE_DIR (default runs/acceptance),
so the run manifest keeps the configuration (epochs, λ grid, repeats) next to the outcome.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from app.core.experiments import build_run_landmarks, generate_run_data, run_sweep, spearman
from app.core.models import RunConfig, StudyResult
from app.core.services import StudyService
from app.core.storage import RunStorage

pytestmark = pytest.mark.skipif(os.getenv("KD_RUN_SLOW") != "1", reason="set KD_RUN_SLOW=1 to run full-scale studies")

JOBS = os.cpu_count() or 1
ACCEPTANCE_DIR = Path(os.getenv("KD_ACCEPTANCE_DIR", "runs/acceptance"))


def desk_config(benchmark: str, **overrides) -> RunConfig:
    return RunConfig.model_validate({"benchmark": benchmark, "repeats": 3, "train": {"epochs": 1500}, **overrides})


def run_study(study: str, cfg: RunConfig) -> StudyResult:
    storage = RunStorage(str(ACCEPTANCE_DIR / f"{cfg.benchmark}-{study}"))
    outcome = StudyService.run(study, cfg, storage, jobs=JOBS)
    assert outcome["success"], outcome.get("error")
    return storage.load_study(study)


@pytest.mark.parametrize(
    "benchmark, threshold",
    [
        ("env", 3.0),
        pytest.param(
            "piston",
            15.0,
            marks=pytest.mark.xfail(
                strict=False,
                reason="piston window 1: data-only Q already sits at the parameter-variance floor, see DESIGN.md",
            ),
        ),
    ],
)
def test_window_study_improves_on_every_window(benchmark, threshold):
    result = run_study("windows", desk_config(benchmark))
    medians = [s.median for s in result.summaries]
    assert all(m > 0 for m in medians)
    assert sum(m >= threshold for m in medians) >= 3


@pytest.mark.parametrize("benchmark", ["env", "piston"])
def test_lambda_opt_decreases_with_noise(benchmark):
    result = run_study("noise", desk_config(benchmark, noise_grid_step=0.05))
    assert len(result.summaries) == 9
    assert result.trend is not None and result.trend <= -0.7


@pytest.mark.parametrize("benchmark", ["env", "piston"])
def test_lambda_opt_increases_with_width(benchmark):
    result = run_study("width", desk_config(benchmark))
    medians = {s.factor: s.median for s in result.summaries}
    assert result.trend is not None and result.trend >= 0.7
    assert medians["1"] > medians["0"]


@pytest.mark.parametrize("benchmark", ["env", "piston"])
def test_local_error_falls_as_lambda_grows(benchmark):
    cfg = desk_config(benchmark)
    q1_by_seed = []
    for seed in (cfg.seed, cfg.seed + 1, cfg.seed + 2):
        data = generate_run_data(cfg, seed=seed)
        landmarks = build_run_landmarks(cfg, data.knowledge, seed, JOBS)
        result = run_sweep(cfg, data, landmarks, jobs=JOBS)
        q1_by_seed.append([r.q1 for r in result.records])
        lambdas = [r.lam for r in result.records]

    medians = np.median(np.array(q1_by_seed), axis=0)
    assert medians[-1] <= medians[0]
    assert spearman(lambdas, medians.tolist()) <= -0.8
