"""Lyapunov energies, per-sample metrics and log-log rate fits."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HypothesisViolationError, InvalidArgumentError
from .problems import primal_dual_gap
from .dynamics import unpack_state
from .schedules import tau_beta_eps_integral, validate_conditions

__all__ = [
    "LyapunovWeights",
    "TrajectorySample",
    "fast_weights",
    "slow_weights",
    "lyapunov_fast",
    "lyapunov_slow",
    "lyapunov_bound_margin",
    "rate_slope",
    "annotate",
    "METRIC_FIELDS",
]

# negative weight m(t) beyond this (relative) is a real violation, not rounding
_WEIGHT_TOL = 1e-10


@dataclass(frozen=True)
class LyapunovWeights:
    b: float
    m: float


def fast_weights(s, t):
    """``b = 1/theta`` and ``m = (t alpha(t) - 1 - 1/theta) / theta``."""
    th = s.theta
    return LyapunovWeights(1.0 / th, (t * s.damping.value(t) - 1.0 - 1.0 / th) / th)


def slow_weights(s, t):
    """``b = 1/(theta t)`` and ``m = (theta t alpha(t) - theta - 1) / (theta t)^2``."""
    th = s.theta
    return LyapunovWeights(
        1.0 / (th * t), (th * t * s.damping.value(t) - th - 1.0) / (th * th * t * t)
    )


def _check_weight(w, scale):
    if w.m < -_WEIGHT_TOL * max(1.0, abs(scale)):
        raise HypothesisViolationError(
            f"Lyapunov weight m={w.m:.3e} < 0: damping condition "
            "alpha(t) >= (1 + theta)/(theta t) is violated"
        )
    return max(w.m, 0.0)


def _energy(p, s, state, ref, lead, w, vel_scale):
    t = state.t
    x, y, u, v = unpack_state(state.lam, p.n, p.m)
    xs, ys = p.point(ref[0], ref[1])
    _, beta, eps = s.coefficients(t)
    gap = primal_dual_gap(p, (x, y), (xs, ys))
    e1 = lead * beta * (gap + 0.5 * eps * (float(x @ x) + float(y @ y)))
    dx, dy = x - xs, y - ys
    ax = w.b * dx + vel_scale * u
    ay = w.b * dy + vel_scale * v
    e2 = 0.5 * float(ax @ ax) + 0.5 * w.m * float(dx @ dx)
    e3 = 0.5 * float(ay @ ay) + 0.5 * w.m * float(dy @ dy)
    return e1 + e2 + e3


def lyapunov_fast(p, s, state, ref):
    """Energy for the fast-decay regime.

    ``t^2 beta (gap + eps/2 (|x|^2 + |y|^2))
    + 1/2 |b (x - x*) + t x'|^2 + m/2 |x - x*|^2`` plus the same for y, with
    ``b = 1/theta`` and ``m = (t alpha - 1 - 1/theta)/theta``.

    Raises
    ------
    HypothesisViolationError
        If ``m(t) < 0``, i.e. the damping condition fails at ``state.t``.
    """
    t = state.t
    w = fast_weights(s, t)
    w = LyapunovWeights(w.b, _check_weight(w, 1.0 / s.theta**2))
    return _energy(p, s, state, ref, t * t, w, t)


def lyapunov_slow(p, s, state, ref):
    """Energy for the slow-decay regime.

    ``beta (gap + eps/2 (|x|^2 + |y|^2))
    + 1/2 |b (x - x*) + x'|^2 + m/2 |x - x*|^2`` plus the same for y, with
    ``b = 1/(theta t)`` and ``m = (theta t alpha - theta - 1)/(theta t)^2``.
    Algebraically ``lyapunov_fast == t**2 * lyapunov_slow``.
    """
    t = state.t
    w = slow_weights(s, t)
    w = LyapunovWeights(w.b, _check_weight(w, 1.0 / (s.theta * t) ** 2))
    return _energy(p, s, state, ref, 1.0, w, 1.0)


def _state_of(sample):
    return getattr(sample, "state", sample)


def lyapunov_bound_margin(trajectory, p, s, ref, kind="fast"):
    """Slack in the integrated energy bound along a trajectory.

    For each sample, ``margin = E(t0) + C * int_{t0}^{t} tau beta eps dtau - E(t)``
    with ``C = (|x*|^2 + |y*|^2) / (2 theta)``. ``kind="fast"`` uses the fast
    energy ``E``; ``kind="slow"`` uses ``t^2 Ebar(t)``. The first sample is taken
    as ``t0``. Nonnegative margins certify the bound.

    Raises
    ------
    HypothesisViolationError
        If ``s`` fails any of the parameter conditions.
    """
    if kind not in ("fast", "slow"):
        raise InvalidArgumentError(f"kind must be 'fast' or 'slow', got {kind!r}")
    report = validate_conditions(s)
    if not report.all_ok:
        raise HypothesisViolationError(
            f"schedule conditions fail: {', '.join(report.failures())}"
        )
    states = [_state_of(smp) for smp in trajectory]
    if not states:
        return []
    xs, ys = p.point(ref[0], ref[1])
    c = (float(xs @ xs) + float(ys @ ys)) / (2.0 * s.theta)

    def energy(st):
        if kind == "fast":
            return lyapunov_fast(p, s, st, (xs, ys))
        return st.t**2 * lyapunov_slow(p, s, st, (xs, ys))

    e0 = energy(states[0])
    out = []
    for st in states:
        bound = e0
        if c:
            bound += c * tau_beta_eps_integral(s, st.t)
        out.append(bound - energy(st))
    return out


def rate_slope(samples, window=None):
    """Least-squares slope of ``log v`` against ``log t``.

    Parameters
    ----------
    samples : sequence of (t, v)
    window : (t_lo, t_hi), optional
        Inclusive fitting window; defaults to all samples.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgumentError("samples must be (t, v) pairs")
    if window is not None:
        lo, hi = window
        arr = arr[(arr[:, 0] >= lo) & (arr[:, 0] <= hi)]
    if arr.shape[0] < 5:
        raise InvalidArgumentError(f"need at least 5 samples in window, got {arr.shape[0]}")
    if np.any(arr[:, 1] <= 0) or np.any(arr[:, 0] <= 0):
        raise InvalidArgumentError("rate fits need positive t and v")
    lt, lv = np.log(arr[:, 0]), np.log(arr[:, 1])
    lt_c = lt - lt.mean()
    return float(lt_c @ (lv - lv.mean()) / (lt_c @ lt_c))


METRIC_FIELDS = (
    "gap",
    "norm_xy",
    "dist_minnorm",
    "speed_x",
    "speed_y",
    "grad_res_f",
    "grad_res_g",
    "e_fast",
    "e_slow",
    "phi",
)


@dataclass
class TrajectorySample:
    """One annotated trajectory point. Optional metrics are ``None`` when undefined."""

    t: float
    state: object
    speed_x: float
    speed_y: float
    norm_xy: float
    gap: Optional[float] = None
    grad_res_f: Optional[float] = None
    grad_res_g: Optional[float] = None
    dist_minnorm: Optional[float] = None
    e_fast: Optional[float] = None
    e_slow: Optional[float] = None
    phi: Optional[float] = None

    def metric(self, name):
        return getattr(self, name)


def annotate(trajectory, p, s, ref=None, energies=True):
    """Attach metrics to each state of ``trajectory``.

    Parameters
    ----------
    trajectory : iterable of FlatState
    p : SaddleProblem
    s : ScheduleSet
        Effective schedules of the simulated system (energies use them).
    ref : PrimalDualPoint, optional
        Saddle reference for the gap, gradient residuals and energies;
        defaults to ``p.known_saddle``. Without one those fields stay ``None``.
    energies : bool
        Compute Lyapunov energies where the damping condition holds.
    """
    if ref is None:
        ref = p.known_saddle
    if ref is not None:
        ref = p.point(ref[0], ref[1])
        gfx, ggy = p.f_grad(ref.x), p.g_grad(ref.y)
    mn = p.min_norm_saddle
    out = []
    for st in trajectory:
        x, y, u, v = unpack_state(st.lam, p.n, p.m)
        smp = TrajectorySample(
            t=st.t,
            state=st,
            speed_x=float(np.linalg.norm(u)),
            speed_y=float(np.linalg.norm(v)),
            norm_xy=float(np.sqrt(x @ x + y @ y)),
        )
        if ref is not None:
            smp.gap = primal_dual_gap(p, (x, y), ref)
            smp.grad_res_f = float(np.linalg.norm(p.f_grad(x) - gfx))
            smp.grad_res_g = float(np.linalg.norm(p.g_grad(y) - ggy))
            if energies:
                try:
                    smp.e_fast = lyapunov_fast(p, s, st, ref)
                    smp.e_slow = lyapunov_slow(p, s, st, ref)
                except HypothesisViolationError:
                    pass
        if mn is not None:
            smp.dist_minnorm = float(np.linalg.norm(x - mn.x) + np.linalg.norm(y - mn.y))
        if p.objective is not None:
            smp.phi = p.objective(x)
        out.append(smp)
    return out
