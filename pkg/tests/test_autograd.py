"""Gradient engine checks against hand-derived formulas and finite differences."""

import numpy as np
import pytest

from coordrl.autograd import Param, Tensor, concat, constant, finite_diff_check, zero_grads


def test_linear_loss_gradient_is_exact():
    rng = np.random.default_rng(0)
    w = Param("w", rng.normal(size=(4,)))
    x = rng.normal(size=(4,))

    def build():
        return (w * constant(x)).sum()

    err = finite_diff_check(build, [w])
    assert err < 1e-8


def test_matmul_gradients_match_hand_formula():
    rng = np.random.default_rng(1)
    a = Param("a", rng.normal(size=(3, 4)))
    b = Param("b", rng.normal(size=(4, 2)))
    g_out = rng.normal(size=(3, 2))

    out = a @ b
    loss = (out * constant(g_out)).sum()
    loss.backward()

    np.testing.assert_allclose(a.grad, g_out @ b.data.T, rtol=1e-12)
    np.testing.assert_allclose(b.grad, a.data.T @ g_out, rtol=1e-12)


def test_bias_broadcast_gradient_sums_over_batch():
    rng = np.random.default_rng(2)
    bias = Param("b", rng.normal(size=(5,)))
    x = constant(rng.normal(size=(7, 5)))

    loss = (x + bias).sum()
    loss.backward()

    np.testing.assert_allclose(bias.grad, np.full(5, 7.0))


def test_shared_node_gradients_accumulate_once_per_consumer():
    x = Param("x", np.array([3.0]))
    y = x * x + x  # dy/dx = 2x + 1
    loss = y.sum()
    loss.backward()
    np.testing.assert_allclose(x.grad, [7.0])


def test_elementwise_op_gradients_match_closed_forms():
    rng = np.random.default_rng(3)
    v = rng.uniform(0.5, 2.0, size=(6,))

    for op, deriv in [
        (lambda t: t.exp(), np.exp(v)),
        (lambda t: t.log(), 1.0 / v),
        (lambda t: t.tanh(), 1.0 - np.tanh(v) ** 2),
        (lambda t: t ** 3, 3.0 * v ** 2),
        (lambda t: t.relu(), np.ones_like(v)),
    ]:
        p = Param("v", v.copy())
        op(p).sum().backward()
        np.testing.assert_allclose(p.grad, deriv, rtol=1e-12)


def test_relu_blocks_gradient_below_zero():
    p = Param("v", np.array([-1.5, 2.0]))
    p.relu().sum().backward()
    np.testing.assert_allclose(p.grad, [0.0, 1.0])


def test_concat_splits_gradient_by_input_widths():
    a = Param("a", np.ones((2, 3)))
    b = Param("b", np.ones((2, 2)))
    weights = constant(np.arange(10.0).reshape(2, 5))

    (concat([a, b], axis=1) * weights).sum().backward()

    np.testing.assert_allclose(a.grad, weights.data[:, :3])
    np.testing.assert_allclose(b.grad, weights.data[:, 3:])


def test_mean_and_sum_reduce_along_axis():
    p = Param("p", np.arange(12.0).reshape(3, 4))
    p.mean(axis=-1, keepdims=True).sum().backward()
    np.testing.assert_allclose(p.grad, np.full((3, 4), 0.25))

    zero_grads([p])
    p.sum(axis=0).sum().backward()
    np.testing.assert_allclose(p.grad, np.ones((3, 4)))


def test_two_layer_tanh_network_passes_finite_difference_check():
    rng = np.random.default_rng(4)
    w1 = Param("w1", rng.normal(scale=0.5, size=(3, 5)))
    b1 = Param("b1", rng.normal(scale=0.5, size=(5,)))
    w2 = Param("w2", rng.normal(scale=0.5, size=(5, 2)))
    b2 = Param("b2", rng.normal(scale=0.5, size=(2,)))
    x = rng.normal(size=(4, 3))
    target = rng.normal(size=(4, 2))

    def build():
        h = (constant(x) @ w1 + b1).tanh()
        out = (h @ w2 + b2).tanh()
        d = out - constant(target)
        return (d * d).mean()

    assert finite_diff_check(build, [w1, b1, w2, b2]) < 1e-4


def test_division_gradients_match_quotient_rule():
    a = Param("a", np.array([2.0, 3.0]))
    b = Param("b", np.array([4.0, 5.0]))
    (a / b).sum().backward()
    np.testing.assert_allclose(a.grad, 1.0 / b.data)
    np.testing.assert_allclose(b.grad, -a.data / b.data ** 2)


def test_backward_requires_scalar_output():
    p = Param("p", np.ones((2, 2)))
    with pytest.raises(ValueError):
        (p * 2.0).backward()


def test_non_finite_gradient_is_a_hard_error():
    p = Param("p", np.array([0.0]))
    loss = (p ** 0.5).sum()  # derivative 0.5 / sqrt(0) -> inf
    with np.errstate(divide="ignore"), pytest.raises(RuntimeError):
        loss.backward()


def test_gradients_accumulate_across_backward_calls_until_cleared():
    p = Param("p", np.array([2.0]))
    (p * 3.0).sum().backward()
    first = p.grad.copy()
    (p * 3.0).sum().backward()
    np.testing.assert_allclose(p.grad, 2 * first)
    zero_grads([p])
    assert p.grad is None


def test_constants_keep_dtype_and_params_default_float64():
    c = constant(np.ones(3, dtype=np.float32))
    assert c.data.dtype == np.float32
    p = Param("p", [1.0, 2.0])
    assert p.data.dtype == np.float64
    out = Tensor(np.float32(1.0)) * 2.0
    assert out.data.dtype == np.float32
