"""First-order right-hand sides for second-order primal-dual flows.

The state is ``lambda = (x, y, x', y')`` flattened into one vector of length
``2n + 2m``. All variants share one evaluation path; they differ only in the
effective coefficients ``(alpha, beta, eps, theta)`` they feed into it:

* ``Han``: the Tikhonov-regularized system with the user's schedules,
* ``HanNoTikhonov``: the same with ``eps == 0``,
* ``MPDD``: the user's damping/scaling with extrapolation ``theta t`` and no
  Tikhonov term (numerically identical to ``HanNoTikhonov``),
* ``APDD``: damping ``alpha / t``, ``beta == 1``, ``eps == 0`` and
  ``theta = max(1/2, 3 / (2 alpha))``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidArgumentError
from .integrator import FlatState
from .schedules import ConstantScaling, PowerDamping, ScheduleSet, ZeroTikhonov

__all__ = [
    "Han",
    "HanNoTikhonov",
    "APDD",
    "MPDD",
    "FlatState",
    "variant_from_tag",
    "pack_state",
    "unpack_state",
    "make_rhs",
    "rhs",
]


@dataclass(frozen=True)
class Han:
    tag = "han"

    def effective_schedules(self, s):
        return s


@dataclass(frozen=True)
class HanNoTikhonov:
    tag = "han_no_tikhonov"

    def effective_schedules(self, s):
        return s.with_tikhonov(ZeroTikhonov())


@dataclass(frozen=True)
class MPDD:
    tag = "mpdd"

    def effective_schedules(self, s):
        return s.with_tikhonov(ZeroTikhonov())


@dataclass(frozen=True)
class APDD:
    alpha: float
    tag = "apdd"

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgumentError(f"APDD alpha must be positive, got {self.alpha}")

    @property
    def theta(self):
        return max(0.5, 3.0 / (2.0 * self.alpha))

    def effective_schedules(self, s):
        return ScheduleSet(
            PowerDamping(self.alpha), ConstantScaling(1.0), ZeroTikhonov(), self.theta, s.t0
        )


def variant_from_tag(tag, alpha=None):
    tag = tag.lower()
    if tag == "han":
        return Han()
    if tag in ("han_no_tikhonov", "notikhonov"):
        return HanNoTikhonov()
    if tag == "mpdd":
        return MPDD()
    if tag == "apdd":
        if alpha is None:
            raise InvalidArgumentError("APDD needs an alpha")
        return APDD(float(alpha))
    raise InvalidArgumentError(f"unknown system variant {tag!r}")


def pack_state(x, y, u, v):
    return np.concatenate([np.ravel(x), np.ravel(y), np.ravel(u), np.ravel(v)]).astype(float)


def unpack_state(lam, n, m):
    """Split a flat state into views ``(x, y, x', y')``."""
    lam = np.asarray(lam)
    if lam.shape != (2 * n + 2 * m,):
        raise InvalidArgumentError(
            f"state has shape {lam.shape}, expected ({2 * n + 2 * m},)"
        )
    return lam[:n], lam[n : n + m], lam[n + m : 2 * n + m], lam[2 * n + m :]


def make_rhs(variant, p, s):
    """Build ``F(t, lambda)`` for ``variant`` on problem ``p`` with schedules ``s``.

    ``x'' = -alpha x' - beta (grad f(x) + eps x + K^T (y + theta t y'))``
    ``y'' = -alpha y' + beta (-grad g(y) - eps y + K (x + theta t x'))``
    """
    eff = variant.effective_schedules(s)
    n, m = p.n, p.m
    nm = n + m
    # skew block [[0, K^T], [-K, 0]] applies both couplings in one product
    skew = np.zeros((nm, nm))
    skew[:n, n:] = p.coupling_t
    skew[n:, :n] = -p.coupling
    f_grad, g_grad = p.f_grad, p.g_grad
    damping, scaling, tikhonov = eff.damping, eff.scaling, eff.tikhonov
    theta, t0 = eff.theta, eff.t0
    size = 2 * nm
    grad = np.empty(nm)

    def f(t, lam):
        if t < t0:
            raise DomainError(f"t={t} precedes t0={t0}")
        if lam.shape != (size,):
            raise InvalidArgumentError(f"state has shape {lam.shape}, expected ({size},)")
        a = damping.value(t)
        b = scaling.value(t)
        e = tikhonov.value(t)
        z = lam[:nm]
        w = lam[nm:]
        grad[:n] = f_grad(z[:n])
        grad[n:] = g_grad(z[n:])
        out = np.empty(size)
        out[:nm] = w
        out[nm:] = -a * w - b * (grad + e * z + skew @ (z + (theta * t) * w))
        return out

    return f


def rhs(variant, p, s, t, lam):
    """Evaluate the right-hand side once; see :func:`make_rhs`."""
    return make_rhs(variant, p, s)(t, np.asarray(lam, dtype=float))
