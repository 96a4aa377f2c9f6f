"""Kernel contracts: hand arithmetic, bounds, finite-difference oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codectx.errors import EmptyInputError, LabelRangeError, ShapeError
from codectx.nn import (
    Adam,
    ParamSet,
    affine,
    affine_backward,
    grad_check,
    gru_step,
    gru_step_backward,
    init_gru_params,
    max_pool,
    max_pool_backward,
    softmax_xent,
)


def test_affine_identity():
    x = np.array([3.0, -1.0])
    assert np.array_equal(affine(x, np.eye(2), np.zeros(2)), x)


def test_affine_hand_case():
    y = affine(np.array([2.0, 3.0]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert np.array_equal(y, np.array([6.0]))


def test_affine_shape_error():
    with pytest.raises(ShapeError):
        affine(np.zeros(3), np.zeros((2, 2)), np.zeros(2))


def test_affine_grad_check():
    rng = np.random.default_rng(0)
    ps = ParamSet()
    x = ps.add("x", rng.normal(size=3))
    W = ps.add("W", rng.normal(size=(4, 3)))
    b = ps.add("b", rng.normal(size=4))
    probe = rng.normal(size=4)

    def f():
        y = affine(ps["x"], ps["W"], ps["b"])
        dx, dW, db = affine_backward(probe, ps["x"], ps["W"])
        ps.accumulate("x", dx)
        ps.accumulate("W", dW)
        ps.accumulate("b", db)
        return float(probe @ y)

    assert grad_check(f, ps) < 1e-6


def _gru_paramset(d, h, seed):
    rng = np.random.default_rng(seed)
    ps = ParamSet()
    init_gru_params(ps, "g.", d, h, rng)
    return ps, rng


def test_gru_zero_fixed_point():
    ps = ParamSet()
    for gate in ("z", "r", "h"):
        ps.add(f"g.W_{gate}", np.zeros((4, 3)))
        ps.add(f"g.U_{gate}", np.zeros((4, 4)))
        ps.add(f"g.b_{gate}", np.zeros(4))
    h_new, _ = gru_step(np.zeros(3), np.zeros(4), ps, "g.")
    assert np.array_equal(h_new, np.zeros(4))


def test_gru_output_bounds():
    ps, rng = _gru_paramset(5, 4, 1)
    h_new, _ = gru_step(rng.normal(size=5), rng.uniform(-1, 1, size=4), ps, "g.")
    assert np.all(h_new > -1.0) and np.all(h_new < 1.0)


def test_gru_grad_check():
    ps, rng = _gru_paramset(4, 3, 2)
    x = ps.add("x", rng.normal(size=4))
    h = ps.add("h", rng.uniform(-0.5, 0.5, size=3))
    probe = rng.normal(size=3)

    def f():
        h_new, cache = gru_step(ps["x"], ps["h"], ps, "g.")
        dx, dh = gru_step_backward(probe, cache, ps, "g.")
        ps.accumulate("x", dx)
        ps.accumulate("h", dh)
        return float(probe @ h_new)

    assert grad_check(f, ps) < 1e-4


def test_gru_shape_error():
    ps, _ = _gru_paramset(4, 3, 3)
    with pytest.raises(ShapeError):
        gru_step(np.zeros(5), np.zeros(3), ps, "g.")


def test_max_pool_hand_case():
    out, _ = max_pool([np.array([1.0, 2.0]), np.array([3.0, 1.0])])
    assert np.array_equal(out, np.array([3.0, 2.0]))


def test_max_pool_singleton_identity():
    v = np.array([0.5, -2.0, 7.0])
    out, _ = max_pool([v])
    assert np.array_equal(out, v)


def test_max_pool_empty():
    with pytest.raises(EmptyInputError):
        max_pool([])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.lists(st.floats(-100, 100), min_size=3, max_size=3),
        min_size=1,
        max_size=6,
    ),
    st.randoms(use_true_random=False),
)
def test_max_pool_dominates_and_permutation_invariant(rows, rnd):
    vs = [np.array(r) for r in rows]
    out, _ = max_pool(vs)
    for v in vs:
        assert np.all(out >= v)
    shuffled = list(vs)
    rnd.shuffle(shuffled)
    out2, _ = max_pool(shuffled)
    assert np.array_equal(out, out2)


def test_max_pool_grad_check_no_ties():
    rng = np.random.default_rng(4)
    ps = ParamSet()
    for i in range(3):
        ps.add(f"v{i}", rng.normal(size=5))
    probe = rng.normal(size=5)

    def f():
        vs = [ps[f"v{i}"] for i in range(3)]
        out, argmax = max_pool(vs)
        for i, dv in enumerate(max_pool_backward(probe, argmax, 3)):
            ps.accumulate(f"v{i}", dv)
        return float(probe @ out)

    assert grad_check(f, ps) < 1e-6


def test_softmax_xent_uniform():
    loss, _ = softmax_xent(np.full(4, 2.5), 1)
    assert loss == pytest.approx(np.log(4.0), abs=1e-12)


def test_softmax_xent_stabilized():
    loss, grad = softmax_xent(np.array([1000.0, 0.0]), 0)
    assert np.isfinite(loss) and loss == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.isfinite(grad))


def test_softmax_xent_label_range():
    with pytest.raises(LabelRangeError):
        softmax_xent(np.zeros(3), 3)


def test_softmax_xent_grad_check():
    rng = np.random.default_rng(5)
    ps = ParamSet()
    ps.add("logits", rng.normal(size=6))

    def f():
        loss, grad = softmax_xent(ps["logits"], 2)
        ps.accumulate("logits", grad)
        return loss

    assert grad_check(f, ps) < 1e-6


def test_adam_zero_grads_no_change():
    ps = ParamSet()
    ps.add("w", np.array([1.0, -2.0, 3.0]))
    before = ps["w"].copy()
    opt = Adam(ps, lr=0.1)
    opt.step(ps)
    assert np.array_equal(ps["w"], before)


def test_adam_quadratic_converges():
    target = 0.3
    ps = ParamSet()
    ps.add("x", np.array([0.0]))
    opt = Adam(ps, lr=1e-2)
    for _ in range(200):
        ps.zero_grads()
        ps.accumulate("x", 2.0 * (ps["x"] - target))
        opt.step(ps)
    assert abs(float(ps["x"][0]) - target) < 1e-3


def test_adam_deterministic():
    def run():
        rng = np.random.default_rng(7)
        ps = ParamSet()
        ps.add("w", rng.normal(size=(3, 3)))
        opt = Adam(ps, lr=1e-2)
        for _ in range(20):
            ps.zero_grads()
            ps.accumulate("w", rng.normal(size=(3, 3)))
            opt.step(ps)
        return ps["w"].copy()

    a, b = run(), run()
    assert np.array_equal(a, b)
