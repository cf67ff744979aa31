"""Finite-difference checks of problem gradients."""

import numpy as np

from .numerics import make_rng
from .problems import aug_grad_x, aug_grad_y, augmented_lagrangian

__all__ = ["central_difference", "relative_error", "check_gradients"]


def central_difference(fun, x, h):
    """Central-difference gradient of scalar ``fun`` at ``x`` with step ``h``."""
    x = np.array(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        xi = x[i]
        x[i] = xi + h
        fp = fun(x)
        x[i] = xi - h
        fm = fun(x)
        x[i] = xi
        out[i] = (fp - fm) / (2.0 * h)
    return out


def relative_error(approx, exact):
    """``||approx - exact|| / max(||exact||, 1)``."""
    return float(np.linalg.norm(approx - exact) / max(np.linalg.norm(exact), 1.0))


def check_gradients(p, points=200, step=1e-6, seed=0, scale=1.0, eps=0.5):
    """Compare analytic gradients of ``p`` against central differences.

    Checks ``grad f``, ``grad g`` and both augmented-Lagrangian gradients
    (with Tikhonov weight ``eps``) at ``points`` random points drawn as
    ``scale * N(0, 1)``. Returns the maximum relative error per quantity.
    """
    rng = make_rng(seed)
    worst = {"f_grad": 0.0, "g_grad": 0.0, "aug_grad_x": 0.0, "aug_grad_y": 0.0}
    for _ in range(points):
        x = scale * rng.standard_normal(p.n)
        y = scale * rng.standard_normal(p.m)
        errs = {
            "f_grad": relative_error(central_difference(p.f_value, x, step), p.f_grad(x)),
            "g_grad": relative_error(central_difference(p.g_value, y, step), p.g_grad(y)),
            "aug_grad_x": relative_error(
                central_difference(lambda xx: augmented_lagrangian(p, (xx, y), eps), x, step),
                aug_grad_x(p, (x, y), eps),
            ),
            # gradient of L_t in y, sign included
            "aug_grad_y": relative_error(
                central_difference(lambda yy: augmented_lagrangian(p, (x, yy), eps), y, step),
                aug_grad_y(p, (x, y), eps),
            ),
        }
        for k, v in errs.items():
            worst[k] = max(worst[k], v)
    return worst
