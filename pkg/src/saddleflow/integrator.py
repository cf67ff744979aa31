"""Adaptive Dormand-Prince 5(4) integration with exact landing on sample times.

Step endpoints are forced onto every requested sample time instead of using
dense output, so returned states carry no interpolation error. Error control
uses the componentwise weighted RMS norm with weights
``atol + rtol * max(|old|, |new|)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalBlowupError, StepBudgetError

__all__ = ["FlatState", "IntegratorConfig", "StepResult", "Trajectory", "rk_step", "integrate"]

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A = [np.array(row) for row in _A]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_MAX_REJECTS_AT_HMIN = 20


@dataclass
class FlatState:
    """Time plus flattened state vector."""

    t: float
    lam: np.ndarray


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    safety: float = 0.9
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise InvalidArgumentError("rtol and atol must be positive")
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise InvalidArgumentError("need 0 < h_min <= h_init <= h_max")
        if not 0 < self.safety < 1:
            raise InvalidArgumentError("safety must lie in (0, 1)")
        if self.max_steps < 1:
            raise InvalidArgumentError("max_steps must be at least 1")


@dataclass
class StepResult:
    accepted: bool
    new_state: FlatState
    error_estimate: float
    suggested_h: float


class Trajectory(list):
    """List of :class:`FlatState` with solver statistics attached."""

    def __init__(self, states=(), accepted_steps=0, rejected_steps=0):
        super().__init__(states)
        self.accepted_steps = accepted_steps
        self.rejected_steps = rejected_steps


def _step_factor(err, safety):
    if err == 0.0:
        return 5.0
    return min(5.0, max(0.2, safety * err ** (-0.2)))


def rk_step(f, state, h, config, k1=None):
    """Attempt one Dormand-Prince step of size ``h`` from ``state``.

    Returns a :class:`StepResult`; ``new_state`` holds the 5th-order solution
    whether or not the step is accepted. ``k1`` may carry ``f(t, lam)`` from
    the previous step's last stage. Raises :class:`NumericalBlowupError` if
    the step produces non-finite values.
    """
    t = state.t
    y0 = state.lam
    k = np.empty((7, y0.shape[0]))
    # overflow shows up as non-finite values, checked once below
    with np.errstate(over="ignore", invalid="ignore"):
        k[0] = f(t, y0) if k1 is None else k1
        for i in range(1, 7):
            k[i] = f(t + _C[i] * h, y0 + h * (_A[i] @ k[:i]))
        y_new = y0 + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        scale = config.atol + config.rtol * np.maximum(np.abs(y0), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2))) if y0.size else 0.0
    if not (math.isfinite(err) and np.isfinite(y_new).all()):
        raise NumericalBlowupError(f"non-finite values in step from t={t}", t)
    new_h = h * _step_factor(err, config.safety)
    new_h = min(config.h_max, max(config.h_min, new_h))
    res = StepResult(err <= 1.0, FlatState(t + h, y_new), err, new_h)
    res.first_stage = k[0]
    res.last_stage = k[6]
    return res


def integrate(f, state0, t_end, samples, config=None):
    """Integrate ``lam' = f(t, lam)`` from ``state0`` to ``t_end``.

    Parameters
    ----------
    f : callable
        ``f(t, lam) -> ndarray``.
    state0 : FlatState
    t_end : float
    samples : sequence of float
        Strictly increasing times in ``[state0.t, t_end]``; each is hit exactly
        by a step endpoint.
    config : IntegratorConfig, optional

    Returns
    -------
    Trajectory
        States at exactly the sample times.

    Raises
    ------
    StepBudgetError
        ``config.max_steps`` accepted steps were taken before ``t_end``.
    NumericalBlowupError
        Non-finite values, or 20 consecutive rejections at ``h_min``. Both
        carry the states produced so far in ``partial``.
    """
    config = config or IntegratorConfig()
    t = float(state0.t)
    t_end = float(t_end)
    if not t_end >= t:
        raise InvalidArgumentError(f"t_end={t_end} precedes start time {t}")
    samples = [float(s) for s in samples]
    if samples and (samples[0] < t or samples[-1] > t_end):
        raise InvalidArgumentError("sample times must lie within [t_start, t_end]")
    if any(b <= a for a, b in zip(samples, samples[1:])):
        raise InvalidArgumentError("sample times must be strictly increasing")

    lam = np.array(state0.lam, dtype=float)
    out = Trajectory()
    idx = 0
    while idx < len(samples) and samples[idx] == t:
        out.append(FlatState(t, lam.copy()))
        idx += 1

    h = config.h_init
    stuck = 0
    k1 = None
    while t < t_end:
        target = samples[idx] if idx < len(samples) else t_end
        remaining = target - t
        landing = h >= remaining or remaining - h < config.h_min
        step = remaining if landing else h
        if landing and step > config.h_max:
            step, landing = 0.5 * remaining, False
        try:
            res = rk_step(f, FlatState(t, lam), step, config, k1=k1)
        except NumericalBlowupError as exc:
            raise NumericalBlowupError(str(exc), exc.t, out) from None
        if res.accepted:
            out.accepted_steps += 1
            stuck = 0
            t = target if landing else res.new_state.t
            lam = res.new_state.lam
            # first-same-as-last: stage 7 is f at the accepted endpoint
            k1 = res.last_stage if not landing else None
            # a short landing step should not shrink the next regular step
            h = max(res.suggested_h, h) if landing and step < h else res.suggested_h
            if landing and idx < len(samples):
                out.append(FlatState(t, lam.copy()))
                idx += 1
            if out.accepted_steps >= config.max_steps and t < t_end:
                raise StepBudgetError(
                    f"max_steps={config.max_steps} exhausted at t={t}", t, out
                )
        else:
            out.rejected_steps += 1
            if step <= config.h_min:
                stuck += 1
                if stuck >= _MAX_REJECTS_AT_HMIN:
                    raise NumericalBlowupError(
                        f"{stuck} consecutive rejections at h_min near t={t}", t, out
                    )
            k1 = res.first_stage
            h = max(config.h_min, step * max(0.2, config.safety * res.error_estimate ** -0.2))
    return out
