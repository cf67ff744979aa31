"""Bilinear saddle problems ``min_x max_y f(x) + <Kx, y> - g(y)``.

Two concrete instances are provided: a rank-one quadratic min-max toy
problem and the saddle reformulation of smoothed-L1 regularized least
squares. Everything else in the package consumes the :class:`SaddleProblem`
bundle defined here.
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "PrimalDualPoint",
    "SaddleProblem",
    "quadratic_minmax_problem",
    "smoothed_l1",
    "smoothed_l1_grad",
    "regression_saddle_problem",
    "lagrangian",
    "augmented_lagrangian",
    "aug_grad_x",
    "aug_grad_y",
    "primal_dual_gap",
    "saddle_residual",
]


class PrimalDualPoint(NamedTuple):
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class SaddleProblem:
    """Callable bundle describing ``L(x, y) = f(x) + <Kx, y> - g(y)``.

    ``coupling`` is the dense ``m x n`` matrix K; its transpose is used for the
    adjoint, so ``<Kx, y> == <x, K^T y>`` holds to rounding.
    """

    n: int
    m: int
    f_value: Callable[[np.ndarray], float]
    f_grad: Callable[[np.ndarray], np.ndarray]
    g_value: Callable[[np.ndarray], float]
    g_grad: Callable[[np.ndarray], np.ndarray]
    coupling: np.ndarray
    known_saddle: Optional[PrimalDualPoint] = None
    min_norm_saddle: Optional[PrimalDualPoint] = None
    smoothness: Optional[tuple] = None
    objective: Optional[Callable[[np.ndarray], float]] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        k = np.asarray(self.coupling, dtype=float)
        if k.shape != (self.m, self.n):
            raise InvalidArgumentError(
                f"coupling has shape {k.shape}, expected ({self.m}, {self.n})"
            )
        k.setflags(write=False)
        object.__setattr__(self, "coupling", k)
        object.__setattr__(self, "coupling_t", np.ascontiguousarray(k.T))
        for attr in ("known_saddle", "min_norm_saddle"):
            pt = getattr(self, attr)
            if pt is not None:
                object.__setattr__(self, attr, self.point(pt.x, pt.y))

    def point(self, x, y):
        """Validate and pack ``(x, y)`` as a :class:`PrimalDualPoint`."""
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape != (self.n,) or y.shape != (self.m,):
            raise InvalidArgumentError(
                f"expected x in R^{self.n} and y in R^{self.m}, "
                f"got {x.shape[0]} and {y.shape[0]}"
            )
        return PrimalDualPoint(x, y)


def _as_point(p, pt):
    return p.point(pt[0], pt[1])


def quadratic_minmax_problem(mc, nc, jc, kc):
    """Rank-one quadratic min-max problem on R^2 x R^2.

    ``f(x) = (mc x1 + nc x2)^2``, ``g(y) = (jc y1 + kc y2)^2`` and
    ``K = [[mc jc, nc jc], [mc kc, nc kc]]``. The saddle set is
    ``{mc x1 + nc x2 = 0, jc y1 + kc y2 = 0}``; its minimal-norm element is
    the origin.
    """
    coeffs = [float(c) for c in (mc, nc, jc, kc)]
    if any(c == 0.0 or not np.isfinite(c) for c in coeffs):
        raise InvalidArgumentError(f"coefficients must be finite and nonzero, got {coeffs}")
    mc, nc, jc, kc = coeffs
    a = np.array([mc, nc])
    c = np.array([jc, kc])

    def f_value(x):
        return float(a @ x) ** 2

    def f_grad(x):
        return 2.0 * float(a @ x) * a

    def g_value(y):
        return float(c @ y) ** 2

    def g_grad(y):
        return 2.0 * float(c @ y) * c

    origin = PrimalDualPoint(np.zeros(2), np.zeros(2))
    return SaddleProblem(
        n=2,
        m=2,
        f_value=f_value,
        f_grad=f_grad,
        g_value=g_value,
        g_grad=g_grad,
        coupling=np.outer(c, a),
        known_saddle=origin,
        min_norm_saddle=origin,
        smoothness=(2.0 * float(a @ a), 2.0 * float(c @ c)),
        name="toy",
        params={"mc": mc, "nc": nc, "jc": jc, "kc": kc},
    )


def _check_a(a):
    if not a > 0:
        raise InvalidArgumentError(f"smoothing parameter a must be positive, got {a}")


def smoothed_l1(x, a):
    """Smoothed L1 penalty ``sum_i (log(1 + e^{a x_i}) + log(1 + e^{-a x_i})) / a``.

    Evaluated as ``|x_i| + 2 log1p(exp(-a |x_i|)) / a``, which is the same
    quantity without overflow for large ``a |x_i|``.
    """
    _check_a(a)
    ax = np.abs(np.asarray(x, dtype=float))
    return float(np.sum(ax + 2.0 * np.log1p(np.exp(-a * ax)) / a))


def smoothed_l1_grad(x, a):
    """Gradient of :func:`smoothed_l1`, componentwise ``tanh(a x_i / 2)``."""
    _check_a(a)
    return np.tanh(0.5 * a * np.asarray(x, dtype=float))


def regression_saddle_problem(k, b, omega=0.1, a=100.0):
    """Saddle form of ``min_x 0.5 ||Kx - b||^2 + omega R^a(x)``.

    ``f(x) = omega R^a(x)`` and ``g(y) = 0.5 ||y||^2 + <b, y>``; maximizing over
    y recovers the regression objective, which is exposed as
    ``problem.objective``.
    """
    k = np.asarray(k, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if k.ndim != 2 or b.shape[0] != k.shape[0]:
        raise InvalidArgumentError(
            f"b has length {b.shape[0]} but K has shape {k.shape}"
        )
    if not omega > 0:
        raise InvalidArgumentError(f"omega must be positive, got {omega}")
    _check_a(a)
    omega, a = float(omega), float(a)
    b = b.copy()
    b.setflags(write=False)

    def f_value(x):
        return omega * smoothed_l1(x, a)

    def f_grad(x):
        return omega * np.tanh(0.5 * a * x)

    def g_value(y):
        return 0.5 * float(y @ y) + float(b @ y)

    def g_grad(y):
        return y + b

    def objective(x):
        r = k @ x - b
        return 0.5 * float(r @ r) + omega * smoothed_l1(x, a)

    m, n = k.shape
    return SaddleProblem(
        n=n,
        m=m,
        f_value=f_value,
        f_grad=f_grad,
        g_value=g_value,
        g_grad=g_grad,
        coupling=k,
        smoothness=(0.5 * omega * a, 1.0),
        objective=objective,
        name="regression",
        params={"omega": omega, "a": a, "b": b},
    )


def lagrangian(p, pt):
    """``f(x) + <Kx, y> - g(y)``."""
    x, y = _as_point(p, pt)
    return p.f_value(x) + float((p.coupling @ x) @ y) - p.g_value(y)


def augmented_lagrangian(p, pt, eps):
    """Tikhonov-augmented Lagrangian ``L + eps/2 (||x||^2 - ||y||^2)``."""
    x, y = _as_point(p, pt)
    return lagrangian(p, (x, y)) + 0.5 * eps * (float(x @ x) - float(y @ y))


def _check_eps(eps):
    if not eps >= 0:
        raise InvalidArgumentError(f"eps must be nonnegative, got {eps}")


def aug_grad_x(p, pt, eps=0.0):
    """x-gradient of the augmented Lagrangian: ``grad f(x) + K^T y + eps x``."""
    _check_eps(eps)
    x, y = _as_point(p, pt)
    return p.f_grad(x) + p.coupling_t @ y + eps * x


def aug_grad_y(p, pt, eps=0.0):
    """y-gradient of the augmented Lagrangian: ``-grad g(y) + K x - eps y``."""
    _check_eps(eps)
    x, y = _as_point(p, pt)
    return -p.g_grad(y) + p.coupling @ x - eps * y


def primal_dual_gap(p, pt, ref):
    """``L(x, y*) - L(x*, y)`` for the reference point ``ref = (x*, y*)``.

    Nonnegative whenever ``ref`` is a saddle point.
    """
    x, y = _as_point(p, pt)
    xs, ys = _as_point(p, ref)
    return lagrangian(p, (x, ys)) - lagrangian(p, (xs, y))


def saddle_residual(p, pt):
    """Optimality residual ``||grad f(x) + K^T y|| + ||K x - grad g(y)||``."""
    x, y = _as_point(p, pt)
    rx = p.f_grad(x) + p.coupling_t @ y
    ry = p.coupling @ x - p.g_grad(y)
    return float(np.linalg.norm(rx) + np.linalg.norm(ry))
