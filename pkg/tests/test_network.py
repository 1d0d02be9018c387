import numpy as np
import pytest

from app.core.errors import DomainError
from app.core.network import ModelParameters, backward, forward, init_parameters


def test_forward_single_and_batch_agree():
    params = init_parameters(2, 8, np.random.default_rng(0))
    batch = np.random.default_rng(1).random((5, 2))
    outputs = forward(params, batch)
    assert outputs.shape == (5,)
    assert forward(params, batch[3]) == pytest.approx(outputs[3])


def test_zero_network_outputs_bias():
    params = ModelParameters(np.zeros((3, 2)), np.zeros(3), np.zeros(3), 1.5)
    assert forward(params, [0.2, 0.9]) == 1.5


def test_init_is_seeded_glorot():
    a = init_parameters(2, 64, np.random.default_rng(4))
    b = init_parameters(2, 64, np.random.default_rng(4))
    assert np.array_equal(a.flatten(), b.flatten())
    assert np.all(np.abs(a.hidden_weights) <= np.sqrt(6.0 / 66))
    assert np.all(a.hidden_biases == 0) and a.output_bias == 0.0
    assert a.size == 64 * 2 + 2 * 64 + 1


def test_flat_layout():
    params = init_parameters(3, 5, np.random.default_rng(2))
    flat = params.flatten()
    assert flat.size == params.size
    restored = ModelParameters.from_flat(flat, 3, 5)
    assert np.array_equal(restored.hidden_weights, params.hidden_weights)
    assert restored.output_bias == params.output_bias
    with pytest.raises(DomainError):
        ModelParameters.from_flat(flat[:-1], 3, 5)


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(3)
    params = init_parameters(2, 6, rng)
    params.hidden_biases = rng.normal(size=6)
    x = rng.random((7, 2))
    upstream = rng.normal(size=7)

    analytic = backward(params, x, upstream).flatten()
    theta = params.flatten()
    h = 1e-6
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[i] += h
        minus[i] -= h
        f_plus = upstream @ forward(ModelParameters.from_flat(plus, 2, 6), x)
        f_minus = upstream @ forward(ModelParameters.from_flat(minus, 2, 6), x)
        numeric[i] = (f_plus - f_minus) / (2 * h)
    assert np.allclose(analytic, numeric, rtol=1e-6, atol=1e-8)


def test_input_dimension_checked():
    params = init_parameters(2, 4, np.random.default_rng(0))
    with pytest.raises(DomainError):
        forward(params, np.zeros((3, 3)))
    with pytest.raises(DomainError):
        backward(params, np.zeros((3, 2)), np.zeros(2))


def test_zero_hidden_weights_give_constant_output():
    biases = np.array([0.3, -1.2, 0.7])
    weights = np.array([2.0, 0.5, -1.0])
    params = ModelParameters(np.zeros((3, 2)), biases, weights, 0.25)
    expected = weights @ np.tanh(biases) + 0.25
    assert forward(params, [0.1, 0.4]) == pytest.approx(expected)
    assert forward(params, [0.9, 0.0]) == pytest.approx(expected)


def test_forward_bounded_by_output_weights():
    params = init_parameters(2, 8, np.random.default_rng(5))
    params.output_bias = -0.4
    x = np.random.default_rng(6).normal(scale=10.0, size=(50, 2))
    bound = abs(params.output_bias) + np.abs(params.output_weights).sum()
    assert np.all(np.abs(forward(params, x)) <= bound)


def test_backward_upstream_scaling():
    params = init_parameters(2, 4, np.random.default_rng(7))
    x = np.random.default_rng(8).random((3, 2))
    zero = backward(params, x, np.zeros(3))
    assert np.all(zero.flatten() == 0.0)
    grad = backward(params, x[0], [0.75])
    assert grad.output_bias == 0.75
