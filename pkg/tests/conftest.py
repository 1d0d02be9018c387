import pytest

from app.core.models import RunConfig

TINY = {
    "benchmark": "env",
    "contexts": 2,
    "clusters": 2,
    "hidden": 4,
    "grid_step": 0.5,
    "train": {"epochs": 30, "step_size": 0.01},
    "n_local": 40,
    "n_local_val": 20,
    "n_anchors": 50,
    "n_knowledge": 300,
    "n_q2": 60,
    "n_test": 60,
    "repeats": 1,
    "seed": 7,
}


@pytest.fixture
def tiny_config() -> RunConfig:
    """Small run configuration for fast pipeline tests"""
    return RunConfig.model_validate(TINY)
