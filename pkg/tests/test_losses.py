"""Loss values, exact gradients, curvature bounds, residual-cache identity."""

import math

import numpy as np
import pytest

import bernpen as bp
from bernpen.losses import check_binary_labels, partial_residual_inner


def random_instance(rng, n=25, p=8, binary=False):
    X = rng.standard_normal((n, p))
    if binary:
        y = np.where(rng.standard_normal(n) > 0, 1.0, -1.0)
    else:
        y = rng.standard_normal(n)
    b = 0.5 * rng.standard_normal(p)
    return X, y, b


def test_squared_loss_frozen():
    rng = np.random.default_rng(0)
    X, y, _ = random_instance(rng)
    assert bp.loss_value(bp.SQUARED, np.zeros(X.shape[1]), X, y) == pytest.approx(
        0.5 * y @ y, rel=1e-14
    )


def test_logistic_loss_frozen():
    rng = np.random.default_rng(1)
    X, y, _ = random_instance(rng, binary=True)
    n = X.shape[0]
    assert bp.loss_value(bp.LOGISTIC, np.zeros(X.shape[1]), X, y) == pytest.approx(
        n * math.log(2.0), rel=1e-14
    )


def test_huber_single_residual():
    # delta=1, residual 2: quadratic part ends at 1, so value = |z| - 1/2 = 1.5
    X = np.array([[1.0]])
    y = np.array([2.0])
    assert bp.loss_value(bp.HUBER, np.zeros(1), X, y, delta=1.0) == pytest.approx(1.5)
    y2 = np.array([0.5])
    assert bp.loss_value(bp.HUBER, np.zeros(1), X, y2, delta=1.0) == pytest.approx(0.125)


def test_gradients_frozen_at_zero():
    rng = np.random.default_rng(2)
    X, y, _ = random_instance(rng, binary=True)
    p = X.shape[1]
    g_log = bp.loss_grad(bp.LOGISTIC, np.zeros(p), X, y)
    assert np.allclose(g_log, -0.5 * X.T @ y, atol=1e-14)
    Xc, yc, _ = random_instance(rng)
    g_sq = bp.loss_grad(bp.SQUARED, np.zeros(p), Xc, yc)
    assert np.allclose(g_sq, -Xc.T @ yc, atol=1e-12)


@pytest.mark.parametrize("kind", [bp.SQUARED, bp.LOGISTIC, bp.HUBER])
def test_gradients_match_central_differences(kind):
    rng = np.random.default_rng(hash(kind) % 2**32)
    for _ in range(10):
        X, y, b = random_instance(rng, binary=(kind == bp.LOGISTIC))
        grad = bp.loss_grad(kind, b, X, y, delta=1.0)
        h = 1e-6
        fd = np.empty_like(b)
        for j in range(b.size):
            bp_ = b.copy()
            bm = b.copy()
            bp_[j] += h
            bm[j] -= h
            fd[j] = (
                bp.loss_value(kind, bp_, X, y, delta=1.0)
                - bp.loss_value(kind, bm, X, y, delta=1.0)
            ) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(grad))))
        assert np.max(np.abs(grad - fd)) / scale <= 1e-6


def test_huber_continuous_at_knot():
    delta = 1.3
    X = np.array([[1.0]])
    b = np.zeros(1)
    eps = 1e-12
    v_in = bp.loss_value(bp.HUBER, b, X, np.array([delta - eps]), delta=delta)
    v_out = bp.loss_value(bp.HUBER, b, X, np.array([delta + eps]), delta=delta)
    assert v_out - v_in == pytest.approx(0.0, abs=1e-10)
    # derivative at the knot equals delta from both sides
    g_in = bp.loss_grad(bp.HUBER, b, X, np.array([delta - 1e-9]), delta=delta)
    g_out = bp.loss_grad(bp.HUBER, b, X, np.array([delta + 1e-9]), delta=delta)
    assert g_in[0] == pytest.approx(-delta, abs=1e-8)
    assert g_out[0] == pytest.approx(-delta, abs=1e-8)


def test_curvature_bounds_standardized_columns():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((40, 6))
    X /= np.linalg.norm(X, axis=0)
    assert np.allclose(bp.curvature_bounds(bp.SQUARED, X), 1.0, atol=1e-12)
    assert np.allclose(bp.curvature_bounds(bp.LOGISTIC, X), 0.25, atol=1e-12)
    assert np.allclose(bp.curvature_bounds(bp.HUBER, X, delta=1.0), 1.0, atol=1e-12)
    for j in range(6):
        assert bp.coord_curvature_bound(bp.SQUARED, j, X) == pytest.approx(1.0, abs=1e-12)


def test_logistic_curvature_is_upper_bound():
    rng = np.random.default_rng(6)
    X, y, b = random_instance(rng, binary=True)
    h = 1e-4
    for j in range(X.shape[1]):
        bp_ = b.copy()
        bm = b.copy()
        bp_[j] += h
        bm[j] -= h
        second = (
            bp.loss_value(bp.LOGISTIC, bp_, X, y)
            - 2.0 * bp.loss_value(bp.LOGISTIC, b, X, y)
            + bp.loss_value(bp.LOGISTIC, bm, X, y)
        ) / h**2
        assert second <= bp.coord_curvature_bound(bp.LOGISTIC, j, X) + 1e-8


def test_partial_residual_inner_matches_direct():
    rng = np.random.default_rng(7)
    n, p = 30, 12
    X = rng.standard_normal((n, p))
    X -= X.mean(axis=0)
    X /= np.linalg.norm(X, axis=0)
    y = rng.standard_normal(n)
    b = rng.standard_normal(p)
    for j in range(p):
        z_partial = X @ b - X[:, j] * b[j]
        direct = float(X[:, j] @ (y - z_partial))
        assert partial_residual_inner(j, b, X, y) == pytest.approx(direct, abs=1e-10)


def test_residual_cache_coherent_after_many_updates():
    # emulate the solver's bookkeeping: r updated incrementally through 1000
    # single-coordinate changes stays equal to y - Xb
    rng = np.random.default_rng(8)
    n, p = 50, 20
    X = rng.standard_normal((n, p))
    X -= X.mean(axis=0)
    X /= np.linalg.norm(X, axis=0)
    y = rng.standard_normal(n)
    b = np.zeros(p)
    r = y - X @ b
    for _ in range(1000):
        j = int(rng.integers(p))
        new = float(rng.standard_normal())
        r -= X[:, j] * (new - b[j])
        b[j] = new
    assert np.max(np.abs(r - (y - X @ b))) <= 1e-10
    j = 3
    cached = float(X[:, j] @ r + b[j])
    assert partial_residual_inner(j, b, X, y) == pytest.approx(cached, abs=1e-9)


def test_unstandardized_column_rejected():
    rng = np.random.default_rng(9)
    X = 3.0 * rng.standard_normal((10, 4))
    y = rng.standard_normal(10)
    with pytest.raises(bp.ContractViolationError):
        partial_residual_inner(0, np.zeros(4), X, y)


def test_label_validation():
    X = np.ones((4, 2))
    bad = np.array([1.0, -1.0, 0.5, 1.0])
    with pytest.raises(bp.ContractViolationError):
        bp.loss_value(bp.LOGISTIC, np.zeros(2), X, bad)
    check_binary_labels(np.array([1.0, -1.0, -1.0]))
    with pytest.raises(bp.ContractViolationError):
        check_binary_labels(np.array([0.0, 1.0]))


def test_dimension_mismatch():
    X = np.ones((4, 2))
    y = np.ones(3)
    with pytest.raises(bp.ContractViolationError):
        bp.loss_value(bp.SQUARED, np.zeros(2), X, y)
    with pytest.raises(bp.InvalidParameterError):
        bp.loss_value("hinge", np.zeros(2), X, np.ones(4))
    with pytest.raises(bp.InvalidParameterError):
        bp.loss_value(bp.HUBER, np.zeros(2), X, np.ones(4), delta=0.0)
