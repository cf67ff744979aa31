import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddleflow.dynamics import (
    APDD,
    MPDD,
    Han,
    HanNoTikhonov,
    make_rhs,
    pack_state,
    rhs,
    unpack_state,
    variant_from_tag,
)
from saddleflow.errors import DomainError, InvalidArgumentError
from saddleflow.experiments import ProblemSpec, build_problem
from saddleflow.problems import quadratic_minmax_problem
from saddleflow.schedules import PowerDamping, PowerScaling, PowerTikhonov, ScheduleSet

EX1 = ScheduleSet(PowerDamping(17.0), PowerScaling(1.0), PowerTikhonov(7.0, 2.0), 1 / 16, 1.0)
TOY = quadratic_minmax_problem(1, 6, 4, 10)
EX1_START = pack_state([1, 1.5], [1, 1.5], [1, 1], [1, 1])


def reference_rhs(p, alpha, beta, eps, theta, t, lam):
    """Direct transcription of the second-order system, block by block."""
    x, y, u, v = unpack_state(lam, p.n, p.m)
    k = p.coupling
    ddx = -alpha * u - beta * (p.f_grad(x) + eps * x + k.T.dot(y + theta * t * v))
    ddy = -alpha * v + beta * (-p.g_grad(y) - eps * y + k.dot(x + theta * t * u))
    return np.concatenate([u, v, ddx, ddy])


def test_equilibrium_at_origin(toy):
    out = rhs(Han(), toy, EX1, 1.0, np.zeros(8))
    assert np.array_equal(out, np.zeros(8))


def test_golden_initial_rhs(toy):
    out = rhs(Han(), toy, EX1, 1.0, EX1_START)
    # hand evaluation: grad f = (20, 120), grad g = (152, 380), eps = 7,
    # K^T (y + y'/16) = (19.875, 119.25), K (x + x'/16) = (41.75, 104.375)
    expected = [1, 1, 1, 1, -63.875, -266.75, -134.25, -303.125]
    assert np.array_equal(out, expected)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=8, max_size=8),
    st.floats(1.0, 50.0),
)
def test_matches_reference(values, t):
    p = TOY
    lam = np.array(values)
    ours = rhs(Han(), p, EX1, t, lam)
    ref = reference_rhs(p, 17 / t, t, 7 / t**2, 1 / 16, t, lam)
    np.testing.assert_allclose(ours, ref, rtol=1e-12, atol=1e-9)


def test_regression_matches_reference(rng):
    p = build_problem(ProblemSpec("regression", dims=(15, 25), kappa=10.0), seed=1)
    s = ScheduleSet(PowerDamping(7.0), PowerScaling(1.0), PowerTikhonov(10.0, 2.0), 1 / 6)
    f = make_rhs(Han(), p, s)
    for _ in range(20):
        lam = rng.standard_normal(80)
        t = rng.uniform(1, 20)
        ref = reference_rhs(p, 7 / t, t, 10 / t**2, 1 / 6, t, lam)
        np.testing.assert_allclose(f(t, lam), ref, rtol=1e-13, atol=1e-13)


def test_han_no_tikhonov_equals_mpdd(toy, rng):
    f1 = make_rhs(HanNoTikhonov(), toy, EX1)
    f2 = make_rhs(MPDD(), toy, EX1)
    for _ in range(1000):
        lam = 10 * rng.standard_normal(8)
        t = rng.uniform(1, 100)
        assert np.array_equal(f1(t, lam), f2(t, lam))


def test_apdd_coefficients(toy, rng):
    variant = APDD(2.0)
    assert variant.theta == 0.75
    assert APDD(5.0).theta == 0.5
    f = make_rhs(variant, toy, EX1)
    lam = rng.standard_normal(8)
    ref = reference_rhs(toy, 2.0 / 3.0, 1.0, 0.0, 0.75, 3.0, lam)
    np.testing.assert_allclose(f(3.0, lam), ref, rtol=1e-13)


def test_affine_in_velocity(toy, rng):
    f = make_rhs(Han(), toy, EX1)
    for _ in range(50):
        t = rng.uniform(1, 20)
        base = rng.standard_normal(8)
        d = np.zeros(8)
        d[4:] = rng.standard_normal(4)
        r0, r1, r2 = f(t, base), f(t, base + d), f(t, base + 2 * d)
        np.testing.assert_allclose(r2 - r1, r1 - r0, rtol=1e-10, atol=1e-10)


def test_adjoint_consistency(rng):
    p = build_problem(ProblemSpec("regression", dims=(12, 20), kappa=5.0), seed=2)
    s = ScheduleSet(PowerDamping(7.0), PowerScaling(1.0), PowerTikhonov(10.0, 2.0), 1 / 6)
    lam = rng.standard_normal(64)
    ours = rhs(Han(), p, s, 2.0, lam)
    x, y, u, v = unpack_state(lam, p.n, p.m)
    ty = np.array([p.coupling[:, j] @ (y + 2.0 / 6 * v) for j in range(p.n)])
    ddx = -3.5 * u - 2.0 * (p.f_grad(x) + 2.5 * x + ty)
    assert np.max(np.abs(ours[32:52] - ddx)) <= 1e-13


@pytest.mark.parametrize("variant", [HanNoTikhonov(), MPDD(), APDD(3.0)])
def test_equilibrium_at_nonzero_saddle(toy, variant):
    # (6, -1) and (-5, 2) lie on the toy saddle set
    lam = pack_state([6.0, -1.0], [-5.0, 2.0], [0, 0], [0, 0])
    assert np.max(np.abs(rhs(variant, toy, EX1, 4.0, lam))) <= 1e-10


def test_errors(toy):
    f = make_rhs(Han(), toy, EX1)
    with pytest.raises(DomainError):
        f(0.5, np.zeros(8))
    with pytest.raises(InvalidArgumentError):
        f(1.0, np.zeros(7))


def test_variant_tags():
    assert variant_from_tag("HAN") == Han()
    assert variant_from_tag("notikhonov") == HanNoTikhonov()
    assert variant_from_tag("apdd", 2) == APDD(2.0)
    with pytest.raises(InvalidArgumentError):
        variant_from_tag("apdd")
    with pytest.raises(InvalidArgumentError):
        variant_from_tag("heavy_ball")
    with pytest.raises(InvalidArgumentError):
        APDD(0.0)


def test_pack_roundtrip():
    lam = pack_state([1, 2], [3], [4, 5], [6])
    x, y, u, v = unpack_state(lam, 2, 1)
    assert list(x) == [1, 2] and list(y) == [3] and list(u) == [4, 5] and list(v) == [6]
