"""Seeded Gaussian sampling and condition-number-controlled matrices.

All randomness is drawn from numpy's PCG64 bit generator (a 128-bit-state
permuted congruential generator) seeded from a 64-bit integer, with normal
variates produced by ``Generator.standard_normal``. Streams are reproducible
bit-for-bit for a fixed numpy version.
"""

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError

__all__ = [
    "make_rng",
    "seeded_gaussian_matrix",
    "orthonormal_factor",
    "conditioned_matrix",
    "spawn_seeds",
]

_SEED_MAX = 2**64 - 1


def _check_seed(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= _SEED_MAX:
        raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


def make_rng(seed):
    """Return a fresh PCG64-backed generator for ``seed``.

    ``seed`` may be a 64-bit unsigned integer or a ``numpy.random.SeedSequence``
    (as produced by :func:`spawn_seeds`).
    """
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def spawn_seeds(seed, count):
    """Derive ``count`` statistically independent child seeds from ``seed``."""
    seed = _check_seed(seed)
    if isinstance(seed, np.random.SeedSequence):
        return seed.spawn(count)
    return np.random.SeedSequence(seed).spawn(count)


def seeded_gaussian_matrix(rows, cols, seed):
    """Draw a ``rows x cols`` matrix of i.i.d. standard normal entries.

    Parameters
    ----------
    rows, cols : int
        Matrix shape; both must be at least 1.
    seed : int or numpy.random.SeedSequence
        Generator seed. Identical seeds give identical matrices.

    Returns
    -------
    ndarray of shape (rows, cols)
    """
    if int(rows) < 1 or int(cols) < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got {rows}x{cols}")
    return make_rng(seed).standard_normal((int(rows), int(cols)))


def orthonormal_factor(a, pivot_tol=1e-10):
    """Orthonormal factor Q of the thin QR factorization ``a = Q R``.

    Signs are normalized so that R has a nonnegative diagonal, which makes
    the factor unique for full-column-rank input.

    Raises
    ------
    InvalidArgumentError
        If ``a`` is not 2-D or has more columns than rows.
    DegenerateInputError
        If some ``|R_ii|`` falls below ``pivot_tol * max|R_jj|``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InvalidArgumentError("expected a 2-D array")
    rows, cols = a.shape
    if rows < cols or cols < 1:
        raise InvalidArgumentError(f"need rows >= cols >= 1, got {rows}x{cols}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix has non-finite entries")
    q, r = np.linalg.qr(a, mode="reduced")
    diag = np.diag(r)
    scale = np.max(np.abs(diag))
    if scale == 0.0 or np.min(np.abs(diag)) <= pivot_tol * scale:
        raise DegenerateInputError("matrix is rank deficient to working tolerance")
    signs = np.where(diag < 0.0, -1.0, 1.0)
    return q * signs


def _planted_spectrum(count, kappa, sigma_max, rng):
    # log-uniform draws with both endpoints pinned so cond(K) == kappa exactly
    lo, hi = np.log(sigma_max / kappa), np.log(sigma_max)
    if count == 1:
        return np.array([sigma_max])
    inner = np.clip(np.exp(rng.uniform(lo, hi, size=count - 2)), sigma_max / kappa, sigma_max)
    s = np.concatenate(([sigma_max], inner, [sigma_max / kappa]))
    return np.sort(s)[::-1]


def conditioned_matrix(rows, cols, kappa, sigma_max=1.0, seed=0, return_factors=False):
    """Random ``rows x cols`` matrix with 2-norm condition number ``kappa``.

    Builds ``K = U diag(s) V^T`` where U and V are orthonormal factors of
    independent seeded Gaussian matrices and ``s`` holds ``min(rows, cols)``
    values drawn log-uniformly from ``[sigma_max / kappa, sigma_max]``. The
    two endpoints are always among the planted values.

    Parameters
    ----------
    rows, cols : int
    kappa : float
        Target condition number, at least 1.
    sigma_max : float
        Largest singular value.
    seed : int
    return_factors : bool
        If true, return ``(K, U, s, V)`` instead of ``K``.
    """
    if not np.isfinite(kappa) or kappa < 1.0:
        raise InvalidArgumentError(f"kappa must be >= 1, got {kappa}")
    if not np.isfinite(sigma_max) or sigma_max <= 0.0:
        raise InvalidArgumentError(f"sigma_max must be positive, got {sigma_max}")
    if int(rows) < 1 or int(cols) < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got {rows}x{cols}")
    rows, cols = int(rows), int(cols)
    r = min(rows, cols)
    seed_u, seed_v, seed_s = spawn_seeds(seed, 3)
    u = orthonormal_factor(seeded_gaussian_matrix(rows, r, seed_u))
    v = orthonormal_factor(seeded_gaussian_matrix(cols, r, seed_v))
    s = _planted_spectrum(r, float(kappa), float(sigma_max), make_rng(seed_s))
    k = (u * s) @ v.T
    if return_factors:
        return k, u, s, v
    return k
