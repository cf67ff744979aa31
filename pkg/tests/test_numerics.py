import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddleflow.errors import DegenerateInputError, InvalidArgumentError
from saddleflow.numerics import (
    conditioned_matrix,
    make_rng,
    orthonormal_factor,
    seeded_gaussian_matrix,
    spawn_seeds,
)


def test_gaussian_is_deterministic():
    assert np.array_equal(seeded_gaussian_matrix(3, 3, 42), seeded_gaussian_matrix(3, 3, 42))


def test_gaussian_depends_on_seed():
    assert not np.array_equal(seeded_gaussian_matrix(3, 3, 42), seeded_gaussian_matrix(3, 3, 43))


@pytest.mark.parametrize("seed", [0, 7, 2**63 + 5])
def test_gaussian_moments(seed):
    g = seeded_gaussian_matrix(200, 500, seed)
    assert -0.05 <= g.mean() <= 0.05
    assert 0.9 <= g.var() <= 1.1


@pytest.mark.parametrize("shape", [(0, 3), (3, 0)])
def test_gaussian_rejects_empty(shape):
    with pytest.raises(InvalidArgumentError):
        seeded_gaussian_matrix(*shape, seed=1)


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, "3", True])
def test_bad_seeds(seed):
    with pytest.raises(InvalidArgumentError):
        make_rng(seed)


def test_spawned_streams_differ():
    a, b = spawn_seeds(5, 2)
    assert not np.array_equal(seeded_gaussian_matrix(4, 4, a), seeded_gaussian_matrix(4, 4, b))
    a2, _ = spawn_seeds(5, 2)
    assert np.array_equal(seeded_gaussian_matrix(4, 4, a), seeded_gaussian_matrix(4, 4, a2))


def test_orthonormal_identity():
    assert np.array_equal(orthonormal_factor(np.eye(3)), np.eye(3))


def test_orthonormal_normalizes_column():
    q = orthonormal_factor(np.array([[3.0], [4.0]]))
    assert np.allclose(q[:, 0], [0.6, 0.8], atol=1e-15)


def test_orthonormal_rank_deficient():
    a = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(DegenerateInputError):
        orthonormal_factor(a)


def test_orthonormal_shape_errors():
    with pytest.raises(InvalidArgumentError):
        orthonormal_factor(np.ones((2, 3)))
    with pytest.raises(InvalidArgumentError):
        orthonormal_factor(np.ones(3))


def test_orthonormal_large():
    q = orthonormal_factor(seeded_gaussian_matrix(500, 200, 3))
    assert np.max(np.abs(q.T @ q - np.eye(200))) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(
    rows=st.integers(1, 60),
    extra=st.integers(0, 40),
    seed=st.integers(0, 2**32),
)
def test_orthonormal_property(rows, extra, seed):
    cols = rows
    rows = rows + extra
    q = orthonormal_factor(seeded_gaussian_matrix(rows, cols, seed))
    assert np.max(np.abs(q.T @ q - np.eye(cols))) <= 1e-12
    r = q.T @ seeded_gaussian_matrix(rows, cols, seed)
    assert np.all(np.diag(r) >= 0)


def test_conditioned_kappa_one():
    k = conditioned_matrix(20, 30, 1.0, sigma_max=2.0, seed=4)
    s = np.linalg.svd(k, compute_uv=False)
    assert np.allclose(s, 2.0, rtol=1e-12)
    assert abs(s[0] / s[-1] - 1.0) <= 1e-8


def test_conditioned_kappa_35():
    s = np.linalg.svd(conditioned_matrix(100, 200, 35.0, seed=0), compute_uv=False)
    assert 35 * (1 - 1e-8) <= s[0] / s[-1] <= 35 * (1 + 1e-8)


def test_conditioned_kappa_200():
    s = np.linalg.svd(conditioned_matrix(200, 500, 200.0, seed=9), compute_uv=False)
    assert abs(s[0] / s[-1] / 200.0 - 1.0) <= 1e-6


@pytest.mark.parametrize("kappa", [0.5, float("nan"), float("inf")])
def test_conditioned_bad_kappa(kappa):
    with pytest.raises(InvalidArgumentError):
        conditioned_matrix(3, 3, kappa)


@settings(max_examples=25, deadline=None)
@given(
    rows=st.integers(1, 40),
    cols=st.integers(1, 40),
    kappa=st.floats(1.0, 1e4),
    sigma=st.floats(0.1, 10.0),
    seed=st.integers(0, 2**40),
)
def test_conditioned_recovers_planted_spectrum(rows, cols, kappa, sigma, seed):
    k, u, s, v = conditioned_matrix(rows, cols, kappa, sigma, seed, return_factors=True)
    np.testing.assert_allclose(np.linalg.norm(k @ v, axis=0), s, rtol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(k.T @ u, axis=0), s, rtol=1e-10)
    assert s[0] == sigma
    if len(s) > 1:
        assert s[-1] == sigma / kappa
    assert np.array_equal(k, conditioned_matrix(rows, cols, kappa, sigma, seed))
