import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddleflow.errors import InvalidArgumentError
from saddleflow.experiments import ProblemSpec, build_problem
from saddleflow.gradcheck import central_difference, check_gradients
from saddleflow.problems import (
    aug_grad_x,
    aug_grad_y,
    augmented_lagrangian,
    lagrangian,
    primal_dual_gap,
    quadratic_minmax_problem,
    regression_saddle_problem,
    saddle_residual,
    smoothed_l1,
    smoothed_l1_grad,
)

finite = st.floats(-50, 50, allow_nan=False)


@pytest.fixture(scope="module")
def reg():
    return build_problem(ProblemSpec("regression", dims=(30, 60), kappa=35.0), seed=3)


def test_toy_coupling(toy):
    assert np.array_equal(toy.coupling, [[4, 24], [10, 60]])


def test_coupling_is_read_only(toy):
    with pytest.raises(ValueError):
        toy.coupling[0, 0] = 1.0


@pytest.mark.parametrize("coeffs", [(0, 6, 4, 10), (1, 6, 0, 10), (1, float("nan"), 4, 10)])
def test_toy_rejects_zero(coeffs):
    with pytest.raises(InvalidArgumentError):
        quadratic_minmax_problem(*coeffs)


def test_smoothed_l1_at_zero():
    assert smoothed_l1(np.zeros(1), 100.0) == pytest.approx(2 * math.log(2) / 100, rel=1e-12)
    assert smoothed_l1_grad(np.zeros(1), 100.0)[0] == 0.0


def test_smoothed_l1_large_argument():
    assert 0 <= smoothed_l1(np.array([10.0]), 100.0) - 10.0 <= 1e-8
    g = smoothed_l1_grad(np.array([10.0]), 100.0)[0]
    assert 1 - 1e-8 < g <= 1.0


def test_smoothed_l1_no_overflow():
    with np.errstate(over="raise"):
        v = smoothed_l1(np.array([1e4]), 100.0)
    assert v == pytest.approx(1e4)


def test_smoothed_l1_matches_naive_form():
    x = np.linspace(-0.05, 0.05, 11)
    a = 100.0
    naive = np.sum(np.log(1 + np.exp(a * x)) + np.log(1 + np.exp(-a * x))) / a
    assert smoothed_l1(x, a) == pytest.approx(naive, rel=1e-13)


@pytest.mark.parametrize("a", [0.0, -1.0])
def test_smoothed_l1_bad_a(a):
    with pytest.raises(InvalidArgumentError):
        smoothed_l1(np.ones(2), a)


def test_lagrangian_values(toy):
    assert lagrangian(toy, ([0, 0], [0, 0])) == 0.0
    assert lagrangian(toy, ([1, 1.5], [0, 0])) == 100.0
    assert lagrangian(toy, ([0, 0], [1, 1.5])) == -361.0


def test_dimension_mismatch(toy):
    with pytest.raises(InvalidArgumentError):
        lagrangian(toy, ([1, 2, 3], [0, 0]))
    with pytest.raises(InvalidArgumentError):
        primal_dual_gap(toy, ([1, 2], [0, 0]), ([0], [0, 0]))


def test_aug_grads_vanish_at_saddle(toy):
    assert np.linalg.norm(aug_grad_x(toy, toy.known_saddle, 0.0)) <= 1e-8
    assert np.linalg.norm(aug_grad_y(toy, toy.known_saddle, 0.0)) <= 1e-8


def test_aug_grad_x_example(toy):
    assert np.array_equal(aug_grad_x(toy, ([1, 0], [0, 0]), 7.0), [9.0, 12.0])


def test_negative_eps_rejected(toy):
    with pytest.raises(InvalidArgumentError):
        aug_grad_x(toy, ([1, 0], [0, 0]), -1.0)


def test_gap_example(toy):
    assert primal_dual_gap(toy, ([1, 1.5], [1, 1.5]), ([0, 0], [0, 0])) == 461.0
    pt = ([0.3, -2.0], [1.1, 4.0])
    assert primal_dual_gap(toy, pt, pt) == 0.0


def test_saddle_residual(toy):
    assert saddle_residual(toy, toy.known_saddle) <= 1e-8
    # grad f = (20, 120); K x = (40, 100) and grad g(0) = 0
    expected = math.sqrt(20**2 + 120**2) + math.sqrt(40**2 + 100**2)
    assert saddle_residual(toy, ([1, 1.5], [0, 0])) == pytest.approx(expected, rel=1e-14)


def test_saddle_residual_lipschitz(toy, rng):
    base = rng.standard_normal((200, 4))
    ratios = []
    for row in base:
        d = 1e-4 * rng.standard_normal(4)
        a = saddle_residual(toy, (row[:2], row[2:]))
        b = saddle_residual(toy, (row[:2] + d[:2], row[2:] + d[2:]))
        ratios.append(abs(a - b) / np.linalg.norm(d))
    # |hess f| + |hess g| + 2 |K| = 74 + 232 + 2 sqrt(37 * 116) < 440
    assert max(ratios) <= 440


def test_toy_gradients():
    worst = check_gradients(quadratic_minmax_problem(1, 6, 4, 10), points=200, step=1e-6)
    assert max(worst.values()) <= 1e-6


def test_regression_gradients(reg):
    worst = check_gradients(reg, points=50, step=1e-7)
    assert max(worst.values()) <= 1e-4


def test_regression_objective_is_max_over_y(reg, rng):
    x = rng.standard_normal(reg.n)
    y_star = reg.coupling @ x - reg.params["b"]
    assert lagrangian(reg, (x, y_star)) == pytest.approx(reg.objective(x), rel=1e-12)
    assert np.linalg.norm(aug_grad_y(reg, (x, y_star))) <= 1e-10


def test_regression_rejects_bad_b():
    with pytest.raises(InvalidArgumentError):
        regression_saddle_problem(np.ones((3, 2)), np.ones(2))


def test_central_difference_exact_on_quadratic():
    g = central_difference(lambda v: float(v @ v), np.array([1.0, -2.0]), 1e-3)
    np.testing.assert_allclose(g, [2.0, -4.0], rtol=1e-9)


def _convexity_violation(fun, u, v):
    return fun(0.5 * u + 0.5 * v) - 0.5 * fun(u) - 0.5 * fun(v)


@pytest.mark.parametrize("which", ["toy", "reg"])
def test_convexity_spot_check(which, toy, reg, rng):
    p = toy if which == "toy" else reg
    for _ in range(1000):
        u, v = rng.standard_normal(p.n), rng.standard_normal(p.n)
        assert _convexity_violation(p.f_value, u, v) <= 1e-10
        u, v = rng.standard_normal(p.m), rng.standard_normal(p.m)
        assert _convexity_violation(p.g_value, u, v) <= 1e-10


def test_gap_nonnegative_at_saddle(toy, rng):
    # any point on the saddle set {x1 + 6 x2 = 0, 4 y1 + 10 y2 = 0} is a valid reference
    refs = [toy.known_saddle, ([6.0, -1.0], [-5.0, 2.0])]
    for ref in refs:
        for _ in range(1000):
            pt = (5 * rng.standard_normal(2), 5 * rng.standard_normal(2))
            assert primal_dual_gap(toy, pt, ref) >= -1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4), st.floats(0, 100))
def test_augmented_identity(v, eps):
    p = quadratic_minmax_problem(1, 6, 4, 10)
    x, y = np.array(v[:2]), np.array(v[2:])
    parts = p.f_value(x) + float((p.coupling @ x) @ y) - p.g_value(y)
    parts += 0.5 * eps * (float(x @ x) - float(y @ y))
    total = augmented_lagrangian(p, (x, y), eps)
    assert total == pytest.approx(parts, rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4))
def test_adjoint_identity(v):
    p = quadratic_minmax_problem(1, 6, 4, 10)
    x, y = np.array(v[:2]), np.array(v[2:])
    assert float((p.coupling @ x) @ y) == pytest.approx(float(x @ (p.coupling_t @ y)), rel=1e-13, abs=1e-9)
