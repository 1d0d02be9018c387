import math

import numpy as np
import pytest

from app.core import training
from app.core.benchgen import LabeledDataset
from app.core.errors import DivergenceError, DomainError, UndefinedRelativeError
from app.core.granulation import GaussianGranule, gaussian_specificity
from app.core.landmarks import InputGranule, KnowledgeLandmark
from app.core.models import SweepRecord, TrainConfig
from app.core.network import forward, init_parameters
from app.core.objective import ObjectiveConfig, data_loss, output_span
from app.core.training import SweepData, delta_q, evaluate_test_phase, fit, q1, q2, select_lambda, sweep


def toy_data(seed: int = 0) -> SweepData:
    rng = np.random.default_rng(seed)

    def labeled(n, low, high):
        x = rng.uniform(low, high, size=(n, 2))
        return LabeledDataset(x, np.sin(3 * x[:, 0]) + x[:, 1])

    train = labeled(30, 0.0, 0.4)
    output = GaussianGranule(1.0, 0.5, 2.0, "native")
    landmark = KnowledgeLandmark(
        InputGranule((GaussianGranule(0.7, 0.3), GaussianGranule(0.7, 0.3)), (1, 1)),
        output,
        gaussian_specificity(output),
    )
    return SweepData(
        train=train,
        val_local=labeled(15, 0.0, 0.4),
        val_global=labeled(20, 0.0, 1.0),
        anchors=rng.random((25, 2)),
        landmarks=[landmark],
        y_span=output_span(train.targets),
        hidden=4,
    )


def record(lam: float, total: float, valid: bool = True) -> SweepRecord:
    return SweepRecord(lam=lam, q1=total / 2, q2=total / 2, q_total=total, valid=valid)


def test_fit_returns_best_iterate_and_trace():
    data = toy_data()
    cfg = ObjectiveConfig(0.5, data.y_span, data.anchors, data.landmarks)
    tc = TrainConfig(epochs=60, step_size=0.01, seed=1)
    result = fit(init_parameters(2, 4, np.random.default_rng(1)), data.train, cfg, tc)

    assert len(result.trace) == 60
    assert result.best_loss == min(loss for _, loss, _, _ in result.trace)
    assert result.best_loss < result.trace[0][1]
    epoch, loss, l_data, l_know = result.trace[result.best_epoch - 1]
    assert loss == pytest.approx(0.5 * l_data + 0.5 * l_know)


def test_fit_plateau_stop():
    data = toy_data()
    cfg = ObjectiveConfig(1.0, data.y_span, data.anchors, data.landmarks)
    tc = TrainConfig(epochs=500, step_size=0.01, tolerance=1.0, patience=10)
    result = fit(init_parameters(2, 4, np.random.default_rng(2)), data.train, cfg, tc)
    assert len(result.trace) == 20


def test_fit_minibatch_is_seeded():
    data = toy_data()
    cfg = ObjectiveConfig(0.7, data.y_span, data.anchors, data.landmarks)
    tc = TrainConfig(epochs=20, step_size=0.01, batch=8, seed=3)
    init = init_parameters(2, 4, np.random.default_rng(3))
    a = fit(init, data.train, cfg, tc)
    b = fit(init, data.train, cfg, tc)
    assert np.array_equal(a.params.flatten(), b.params.flatten())


def test_validation_objectives():
    data = toy_data()
    params = init_parameters(2, 4, np.random.default_rng(0))
    a, b, total = evaluate_test_phase(params, data.val_local, data.val_global)
    assert a == pytest.approx(q1(params, data.val_local))
    assert b == pytest.approx(q2(params, data.val_global))
    assert total == a + b


def test_sweep_grid_and_determinism():
    data = toy_data()
    tc = TrainConfig(epochs=40, step_size=0.01, seed=5)
    first = sweep(0.5, data, tc)
    second = sweep(0.5, data, tc)

    assert [r.lam for r in first.records] == [0.0, 0.5, 1.0]
    assert all(r.valid and r.q_total == r.q1 + r.q2 for r in first.records)
    assert first.lambda_opt in (0.0, 0.5, 1.0)
    assert first.record_at(first.lambda_opt).q_total == min(r.q_total for r in first.records)
    assert [r.q_total for r in first.records] == [r.q_total for r in second.records]
    assert first.fit_at(0.5) is not None


def test_sweep_parallel_matches_serial():
    data = toy_data(1)
    tc = TrainConfig(epochs=20, step_size=0.01, seed=6)
    serial = sweep(0.5, data, tc, jobs=1)
    parallel = sweep(0.5, data, tc, jobs=2)
    assert [r.q_total for r in serial.records] == [r.q_total for r in parallel.records]
    assert serial.lambda_opt == parallel.lambda_opt


def test_sweep_rejects_grid_step():
    with pytest.raises(DomainError):
        sweep(0.3, toy_data(), TrainConfig(epochs=1))


def test_diverged_fit_is_excluded(monkeypatch):
    real_fit = training.fit

    def flaky_fit(init, dataset, cfg, tc):
        if cfg.lam == 0.0:
            raise DivergenceError(7)
        return real_fit(init, dataset, cfg, tc)

    monkeypatch.setattr(training, "fit", flaky_fit)
    result = sweep(0.5, toy_data(), TrainConfig(epochs=10, step_size=0.01))
    invalid = result.record_at(0.0)
    assert not invalid.valid and math.isnan(invalid.q_total)
    assert result.lambda_opt in (0.5, 1.0)
    assert result.fit_at(0.0) is None


def test_select_lambda_prefers_larger_on_ties():
    records = [record(0.0, 2.0), record(0.4, 1.0), record(0.8, 1.0), record(1.0, 3.0)]
    assert select_lambda(records) == 0.8
    assert select_lambda([record(0.0, math.nan, valid=False)]) is None


def test_delta_q():
    assert delta_q(record(1.0, 4.0), record(0.5, 3.0)) == (1.0, 25.0)
    assert delta_q(record(1.0, 2.0), record(1.0, 2.0)) == (0.0, 0.0)
    with pytest.raises(UndefinedRelativeError):
        delta_q(record(1.0, 0.0), record(0.5, 0.0))


def test_fit_reaches_constant_target():
    rng = np.random.default_rng(20)
    data = LabeledDataset(rng.random((25, 2)), np.full(25, 0.3))
    cfg = ObjectiveConfig(1.0, 1.0, np.zeros((0, 2)), [])
    result = fit(init_parameters(2, 4, np.random.default_rng(21)), data, cfg, TrainConfig(epochs=3000, step_size=1e-3))
    assert data_loss(result.params, data, 1.0) <= 1e-6


def test_knowledge_only_fit_is_drawn_to_the_landmark():
    output = GaussianGranule(0.8, 1.0, 4.0, "native")
    landmark = KnowledgeLandmark(
        InputGranule((GaussianGranule(0.5, 0.25), GaussianGranule(0.5, 0.25)), (1, 1)),
        output,
        gaussian_specificity(output),
    )
    rng = np.random.default_rng(22)
    train = LabeledDataset(rng.random((10, 2)), rng.normal(size=10))
    cfg = ObjectiveConfig(0.0, 1.0, rng.random((200, 2)), [landmark])
    result = fit(init_parameters(2, 8, np.random.default_rng(23)), train, cfg, TrainConfig(epochs=1500, step_size=0.01))
    assert abs(forward(result.params, [0.5, 0.5]) - output.center) <= 0.5 * output.spread


def test_data_only_fit_beats_knowledge_only_on_local_data():
    result = sweep(1.0, toy_data(2), TrainConfig(epochs=300, step_size=0.01, seed=8))
    assert [r.lam for r in result.records] == [0.0, 1.0]
    assert result.record_at(1.0).q1 <= result.record_at(0.0).q1
