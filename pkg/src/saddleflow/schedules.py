"""Time-dependent damping, scaling and Tikhonov coefficients.

A :class:`ScheduleSet` bundles damping ``alpha(t)``, scaling ``beta(t)``,
Tikhonov weight ``eps(t)``, the extrapolation constant ``theta`` and the
initial time ``t0``. This module also checks the parameter conditions the
Lyapunov certificates rely on and classifies the Tikhonov decay regime.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidArgumentError, UnsupportedError

__all__ = [
    "PowerDamping",
    "Case2Damping",
    "PowerScaling",
    "ConstantScaling",
    "PowerTikhonov",
    "Case2Tikhonov",
    "ZeroTikhonov",
    "Tabulated",
    "ScheduleSet",
    "ConditionReport",
    "RegimeClass",
    "evaluate",
    "default_grid",
    "validate_conditions",
    "classify_regime",
    "tau_beta_eps_integral",
    "CONDITION_TOL",
]

CONDITION_TOL = 1e-12


class _Family:
    tag = ""

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def power_law(self):
        """Return ``(coef, exponent)`` if the family is ``coef * t**exponent``."""
        return None

    def describe(self):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerDamping(_Family):
    """``alpha(t) = alpha / t``."""

    alpha: float
    tag = "power_damping"

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")

    def value(self, t):
        return self.alpha / t

    def derivative(self, t):
        return -self.alpha / (t * t)

    def power_law(self):
        return (self.alpha, -1.0)

    def describe(self):
        return f"power:{self.alpha!r}"


@dataclass(frozen=True)
class Case2Damping(_Family):
    """``alpha(t) = (2 alpha t - 2) / t^2``; satisfies ``alpha + t alpha' = 2 / t^2``."""

    alpha: float
    tag = "case2_damping"

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")

    def value(self, t):
        return (2.0 * self.alpha * t - 2.0) / (t * t)

    def derivative(self, t):
        return (4.0 - 2.0 * self.alpha * t) / t**3

    def describe(self):
        return f"case2:{self.alpha!r}"


@dataclass(frozen=True)
class PowerScaling(_Family):
    """``beta(t) = t**beta``."""

    beta: float
    tag = "power_scaling"

    def __post_init__(self):
        if not self.beta >= 0:
            raise InvalidArgumentError(f"beta must be nonnegative, got {self.beta}")

    def value(self, t):
        return t**self.beta

    def derivative(self, t):
        if self.beta == 0:
            return 0.0
        return self.beta * t ** (self.beta - 1.0)

    def power_law(self):
        return (1.0, float(self.beta))

    def describe(self):
        return f"power:{self.beta!r}"


@dataclass(frozen=True)
class ConstantScaling(_Family):
    value_: float = 1.0
    tag = "constant"

    def __post_init__(self):
        if not self.value_ > 0:
            raise InvalidArgumentError(f"constant must be positive, got {self.value_}")

    def value(self, t):
        return self.value_

    def derivative(self, t):
        return 0.0

    def power_law(self):
        return (self.value_, 0.0)

    def describe(self):
        return f"const:{self.value_!r}"


@dataclass(frozen=True)
class PowerTikhonov(_Family):
    """``eps(t) = c / t**r``."""

    c: float
    r: float
    tag = "power_tikhonov"

    def __post_init__(self):
        if not (self.c > 0 and self.r > 0):
            raise InvalidArgumentError(f"need c > 0 and r > 0, got c={self.c}, r={self.r}")

    def value(self, t):
        return self.c / t**self.r

    def derivative(self, t):
        return -self.r * self.c / t ** (self.r + 1.0)

    def power_law(self):
        return (self.c, -float(self.r))

    def describe(self):
        return f"power:{self.c!r},{self.r!r}"


@dataclass(frozen=True)
class Case2Tikhonov(_Family):
    """``eps(t) = 3 / t**(beta + 3)``, paired with :class:`Case2Damping`."""

    beta: float
    tag = "case2_tikhonov"

    def __post_init__(self):
        if not self.beta >= 0:
            raise InvalidArgumentError(f"beta must be nonnegative, got {self.beta}")

    def value(self, t):
        return 3.0 / t ** (self.beta + 3.0)

    def derivative(self, t):
        return -3.0 * (self.beta + 3.0) / t ** (self.beta + 4.0)

    def power_law(self):
        return (3.0, -(self.beta + 3.0))

    def describe(self):
        return f"case2:{self.beta!r}"


@dataclass(frozen=True)
class ZeroTikhonov(_Family):
    tag = "zero"

    def value(self, t):
        return 0.0

    def derivative(self, t):
        return 0.0

    def power_law(self):
        return (0.0, 0.0)

    def describe(self):
        return "zero"


@dataclass(frozen=True)
class Tabulated(_Family):
    """Piecewise-linear table of ``(t, value, derivative)`` triples.

    Only meant for tests of the non-analytic code paths.
    """

    times: tuple
    values: tuple
    derivatives: tuple
    tag = "tabulated"

    def __post_init__(self):
        if not (len(self.times) == len(self.values) == len(self.derivatives) >= 2):
            raise InvalidArgumentError("table columns must have equal length >= 2")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidArgumentError("table times must be strictly increasing")

    def value(self, t):
        return float(np.interp(t, self.times, self.values))

    def derivative(self, t):
        return float(np.interp(t, self.times, self.derivatives))

    def describe(self):
        return f"tabulated[{len(self.times)}]"


def evaluate(family, t, t0):
    """Return ``(value, derivative)`` of ``family`` at ``t >= t0``."""
    if t < t0:
        raise DomainError(f"t={t} precedes t0={t0}")
    return family.value(t), family.derivative(t)


@dataclass(frozen=True)
class ScheduleSet:
    damping: _Family
    scaling: _Family
    tikhonov: _Family
    theta: float
    t0: float = 1.0

    def __post_init__(self):
        if not self.theta > 0:
            raise InvalidArgumentError(f"theta must be positive, got {self.theta}")
        if not self.t0 > 0:
            raise InvalidArgumentError(f"t0 must be positive, got {self.t0}")

    def coefficients(self, t):
        """``(alpha, beta, eps)`` at time t."""
        if t < self.t0:
            raise DomainError(f"t={t} precedes t0={self.t0}")
        return self.damping.value(t), self.scaling.value(t), self.tikhonov.value(t)

    def with_tikhonov(self, tikhonov):
        return ScheduleSet(self.damping, self.scaling, tikhonov, self.theta, self.t0)

    def describe(self):
        return {
            "alpha": self.damping.describe(),
            "beta": self.scaling.describe(),
            "eps": self.tikhonov.describe(),
            "theta": self.theta,
            "t0": self.t0,
        }


@dataclass
class ConditionReport:
    """Pointwise verdicts on the damping, scaling, growth and monotonicity conditions.

    Margins are ``rhs - lhs`` of each inequality written as ``lhs <= rhs``;
    ``worst_margin`` keeps the smallest one seen on the grid.
    """

    c_damping_ok: bool
    c_scaling_ok: bool
    c_tikhonov_growth_ok: bool
    c_eps_monotone_ok: bool
    worst_margin: dict
    grid: list
    margins: dict = field(default_factory=dict, repr=False)
    analytic: dict = field(default_factory=dict)

    @property
    def all_ok(self):
        return (
            self.c_damping_ok
            and self.c_scaling_ok
            and self.c_tikhonov_growth_ok
            and self.c_eps_monotone_ok
        )

    def failures(self):
        names = {
            "damping": self.c_damping_ok,
            "scaling": self.c_scaling_ok,
            "tikhonov_growth": self.c_tikhonov_growth_ok,
            "eps_monotone": self.c_eps_monotone_ok,
        }
        return [k for k, ok in names.items() if not ok]


def default_grid(t0, count=200, span=100.0):
    """Log-spaced validation grid on ``[t0, span * t0]``."""
    grid = np.geomspace(t0, span * t0, count)
    grid[0] = t0
    return grid


def _analytic_power_checks(s):
    """Exact coefficient inequalities for pure power families.

    Returns a dict of condition name -> exact margin (over all ``t >= t0``),
    with ``None`` where no closed form applies.
    """
    out = {"damping": None, "scaling": None, "tikhonov_growth": None}
    th = s.theta
    if isinstance(s.damping, PowerDamping):
        # alpha/t >= (1 + theta)/(theta t)  <=>  alpha >= 1 + 1/theta
        out["damping"] = s.damping.alpha - (1.0 + 1.0 / th)
    sc = s.scaling.power_law()
    if sc is not None:
        # beta'/beta = p/t <= (1 - 2 theta)/(theta t)  <=>  p <= 1/theta - 2
        out["scaling"] = (1.0 / th - 2.0) - sc[1]
    ep = s.tikhonov.power_law()
    if isinstance(s.damping, PowerDamping) and ep is not None and sc is not None:
        # alpha + t alpha' == 0 <= t beta eps, always nonnegative
        out["tikhonov_growth"] = 0.0
    return out


def validate_conditions(s, grid=None):
    """Check the damping, scaling, Tikhonov-growth and monotonicity conditions.

    Conditions, for every sampled ``t``:

    * damping: ``alpha(t) >= (1 + theta) / (theta t)``
    * scaling: ``beta'(t) / beta(t) <= (1 - 2 theta) / (theta t)``
    * Tikhonov growth: ``alpha(t) + t alpha'(t) <= t beta(t) eps(t)``
    * monotonicity: ``eps'(t) <= 0``

    For power-law families the sampled verdict is cross-checked against the
    exact coefficient inequality, which covers all ``t >= t0``; a failure on
    either route fails the condition.
    """
    if grid is None:
        grid = default_grid(s.t0)
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise InvalidArgumentError("validation grid is empty")
    if np.any(grid < s.t0):
        raise DomainError(f"grid contains times before t0={s.t0}")
    th = s.theta
    margins = {k: [] for k in ("damping", "scaling", "tikhonov_growth", "eps_monotone")}
    for t in grid:
        a, da = evaluate(s.damping, t, s.t0)
        b, db = evaluate(s.scaling, t, s.t0)
        e, de = evaluate(s.tikhonov, t, s.t0)
        margins["damping"].append(a - (1.0 + th) / (th * t))
        margins["scaling"].append((1.0 - 2.0 * th) / (th * t) - db / b)
        margins["tikhonov_growth"].append(t * b * e - (a + t * da))
        margins["eps_monotone"].append(-de)
    worst = {k: float(np.min(v)) for k, v in margins.items()}
    analytic = _analytic_power_checks(s)
    ok = {}
    for k, w in worst.items():
        good = w >= -CONDITION_TOL
        exact = analytic.get(k)
        if exact is not None:
            good = good and exact >= -CONDITION_TOL
        ok[k] = good
    return ConditionReport(
        c_damping_ok=ok["damping"],
        c_scaling_ok=ok["scaling"],
        c_tikhonov_growth_ok=ok["tikhonov_growth"],
        c_eps_monotone_ok=ok["eps_monotone"],
        worst_margin=worst,
        grid=[float(t) for t in grid],
        margins={k: np.asarray(v) for k, v in margins.items()},
        analytic={k: v for k, v in analytic.items() if v is not None},
    )


@dataclass(frozen=True)
class RegimeClass:
    """Tikhonov decay regime.

    ``kind`` is ``"Fast"`` when ``int t beta eps dt < inf``, ``"SlowOnly"``
    when only ``int beta eps / t dt < inf``, and ``"Neither"`` otherwise.
    """

    kind: str
    strong_convergence_flag: bool
    method: str


def _product_power_law(s):
    sc = s.scaling.power_law()
    ep = s.tikhonov.power_law()
    if sc is None or ep is None:
        return None
    return sc[0] * ep[0], sc[1] + ep[1]


def _classify_analytic(s):
    coef, q = _product_power_law(s)
    if coef == 0.0:
        return RegimeClass("Fast", False, "analytic")
    # beta eps = coef t^q;  fast: int t^(1+q) < inf; slow: int t^(q-1) < inf
    fast = q < -2.0
    slow = q < 0.0
    strong = slow and (2.0 + q) > 0.0
    kind = "Fast" if fast else ("SlowOnly" if slow else "Neither")
    return RegimeClass(kind, strong, "analytic")


def _doubling_integral_converges(fn, t0, horizon, growth_tol=0.01):
    # partial sums over [t0, 2^k t0]; diverge if the last doubling adds > growth_tol
    total, lo, last_piece = 0.0, t0, 0.0
    while lo < horizon:
        hi = min(2.0 * lo, horizon)
        piece, _ = integrate.quad(fn, lo, hi, limit=200, epsabs=0.0, epsrel=1e-10)
        total += piece
        last_piece = piece
        lo = hi
    if total == 0.0:
        return True
    return abs(last_piece) <= growth_tol * abs(total)


def _classify_quadrature(s, horizon=1e8):
    t0 = s.t0

    def be(t):
        return s.scaling.value(t) * s.tikhonov.value(t)

    fast = _doubling_integral_converges(lambda t: t * be(t), t0, horizon)
    slow = _doubling_integral_converges(lambda t: be(t) / t, t0, horizon)
    h_end = horizon**2 * be(horizon)
    h_prev = (horizon / 2.0) ** 2 * be(horizon / 2.0)
    growing = h_end > 0 and h_end > 1.001 * h_prev
    kind = "Fast" if fast and slow else ("SlowOnly" if slow else "Neither")
    return RegimeClass(kind, bool(slow and growing), "quadrature")


def classify_regime(s, method="auto", horizon=1e8):
    """Classify the Tikhonov regime of ``s``.

    Parameters
    ----------
    s : ScheduleSet
    method : {"auto", "analytic", "quadrature"}
        ``"auto"`` uses the closed-form rule when scaling and Tikhonov are
        both power laws, and quadrature otherwise. The quadrature route
        integrates over doubling horizons up to ``horizon`` and declares
        divergence when the last doubling still adds more than 1% to the
        partial sum; this is a heuristic.
    """
    if method not in ("auto", "analytic", "quadrature"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    has_closed_form = _product_power_law(s) is not None
    if method == "analytic" or (method == "auto" and has_closed_form):
        if not has_closed_form:
            raise UnsupportedError("no analytic rule for this schedule combination")
        return _classify_analytic(s)
    return _classify_quadrature(s, horizon)


def tau_beta_eps_integral(s, t, rtol=1e-10):
    """``int_{t0}^{t} tau beta(tau) eps(tau) dtau`` (closed form for power laws)."""
    if t < s.t0:
        raise DomainError(f"t={t} precedes t0={s.t0}")
    law = _product_power_law(s)
    if law is not None:
        coef, q = law
        if coef == 0.0:
            return 0.0
        p = q + 2.0  # antiderivative exponent of coef * tau^(q+1)
        if p == 0.0:
            return coef * math.log(t / s.t0)
        return coef * (t**p - s.t0**p) / p
    val, _ = integrate.quad(
        lambda u: u * s.scaling.value(u) * s.tikhonov.value(u),
        s.t0,
        t,
        epsabs=0.0,
        epsrel=rtol,
        limit=200,
    )
    return val
