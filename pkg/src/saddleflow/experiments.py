"""Experiment configs, presets and runners for the two benchmark problems.

Example 1 is the rank-one quadratic min-max problem with the
``alpha = 17``, ``beta = 1``, ``theta = 1/16`` schedules on ``[1, 20]``.
Example 2 is smoothed-L1 regression with a condition-number-controlled K
and ``alpha = 7``, ``beta = 1``, ``theta = 1/6``.
"""

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .analysis import annotate, rate_slope
from .dynamics import APDD, Han, HanNoTikhonov, make_rhs, pack_state
from .errors import InvalidArgumentError, NumericalBlowupError, SaddleFlowError
from .integrator import FlatState, IntegratorConfig, integrate
from .numerics import conditioned_matrix, seeded_gaussian_matrix, spawn_seeds
from .problems import (
    quadratic_minmax_problem,
    regression_saddle_problem,
    saddle_residual,
)
from .schedules import (
    PowerDamping,
    PowerScaling,
    PowerTikhonov,
    ScheduleSet,
    ZeroTikhonov,
    classify_regime,
    validate_conditions,
)

log = logging.getLogger(__name__)

__all__ = [
    "ProblemSpec",
    "ExperimentConfig",
    "RunResult",
    "RunFailedError",
    "ComparisonRow",
    "build_problem",
    "initial_state",
    "sample_grid",
    "run",
    "run_regression",
    "sweep",
    "compare",
    "numeric_reference",
    "example1_config",
    "example2_config",
    "PRESETS",
    "preset_configs",
]

EXAMPLE1_COEFFS = (1.0, 6.0, 4.0, 10.0)


@dataclass(frozen=True)
class ProblemSpec:
    """Which benchmark problem to build, and its parameters.

    ``dims`` is ``(m, n)``: K is ``m x n``, x lives in R^n and y in R^m.
    """

    kind: str = "toy"
    coeffs: tuple = EXAMPLE1_COEFFS
    dims: tuple = (100, 200)
    kappa: float = 35.0
    sigma_max: float = 1.0
    omega: float = 0.1
    a: float = 100.0

    def __post_init__(self):
        if self.kind not in ("toy", "regression"):
            raise InvalidArgumentError(f"unknown problem kind {self.kind!r}")

    def describe(self):
        if self.kind == "toy":
            return {"problem": "toy", "coeffs": ",".join(repr(c) for c in self.coeffs)}
        return {
            "problem": "regression",
            "dims": f"{self.dims[0]}x{self.dims[1]}",
            "kappa": self.kappa,
            "sigma_max": self.sigma_max,
            "omega": self.omega,
            "a": self.a,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    variant: object
    schedules: ScheduleSet
    t_end: float = 20.0
    sample_count: int = 400
    seed: int = 0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    initial: object = "auto"
    reference: str = "auto"
    reference_horizon: float = 2.0
    label: str = ""

    def __post_init__(self):
        if not self.t_end > self.schedules.t0:
            raise InvalidArgumentError(
                f"span [{self.schedules.t0}, {self.t_end}] is empty"
            )
        if self.sample_count < 2:
            raise InvalidArgumentError("sample_count must be at least 2")
        if self.reference not in ("auto", "known", "dynamics", "none"):
            raise InvalidArgumentError(f"unknown reference mode {self.reference!r}")

    def _initial_rule(self):
        if not isinstance(self.initial, str):
            return "explicit"
        if self.initial == "auto":
            return "example1" if self.problem.kind == "toy" else "zeros"
        return self.initial

    @property
    def span(self):
        return (self.schedules.t0, self.t_end)

    def describe(self):
        d = {"label": self.label, "variant": self.variant.tag}
        if isinstance(self.variant, APDD):
            d["apdd_alpha"] = self.variant.alpha
        d.update(self.problem.describe())
        d.update(self.schedules.describe())
        d.update(
            t_end=self.t_end,
            samples=self.sample_count,
            seed=self.seed,
            initial=self._initial_rule(),
            reference=self.reference,
        )
        return d


@dataclass
class RunResult:
    config: ExperimentConfig
    samples: list
    condition_report: object
    regime: object
    wall_time: float
    steps: int
    rejections: int
    reference_kind: Optional[str] = None
    failed: bool = False
    error: Optional[str] = None

    def series(self, metric):
        """``(t, value)`` pairs for samples where ``metric`` is defined."""
        return [(s.t, getattr(s, metric)) for s in self.samples if getattr(s, metric) is not None]

    def final(self, metric):
        return getattr(self.samples[-1], metric)


class RunFailedError(SaddleFlowError):
    """Integration failed; ``result`` holds the annotated partial trajectory."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def build_problem(spec, seed=0):
    """Construct the :class:`SaddleProblem` described by ``spec``.

    For regression, K and b come from independent child streams of ``seed``,
    so every variant run with the same seed sees identical data.
    """
    if spec.kind == "toy":
        return quadratic_minmax_problem(*spec.coeffs)
    m, n = spec.dims
    seed_k, seed_b = spawn_seeds(seed, 2)
    k = conditioned_matrix(m, n, spec.kappa, spec.sigma_max, seed=seed_k)
    b = seeded_gaussian_matrix(m, 1, seed_b).ravel()
    return regression_saddle_problem(k, b, omega=spec.omega, a=spec.a)


def initial_state(config, p):
    """Initial flat state ``(x, y, x', y')`` at ``t0``.

    ``"example1"`` is ``x = y = (1, 1.5)``, ``x' = y' = (1, 1)`` (toy problem only);
    ``"zeros"`` is the origin with zero velocity; ``"auto"`` picks ``"example1"``
    for the toy problem and ``"zeros"`` otherwise. An explicit 4-tuple of
    vectors is used as given.
    """
    rule = config.initial
    if isinstance(rule, str):
        if rule == "auto":
            rule = "example1" if config.problem.kind == "toy" else "zeros"
        if rule == "example1":
            if p.n != 2 or p.m != 2:
                raise InvalidArgumentError("the 'example1' initial state needs n = m = 2")
            return pack_state([1.0, 1.5], [1.0, 1.5], [1.0, 1.0], [1.0, 1.0])
        if rule == "zeros":
            return np.zeros(2 * (p.n + p.m))
        raise InvalidArgumentError(f"unknown initial-state rule {rule!r}")
    x, y, u, v = rule
    lam = pack_state(x, y, u, v)
    if lam.shape != (2 * (p.n + p.m),):
        raise InvalidArgumentError("explicit initial state has the wrong dimension")
    return lam


def sample_grid(t0, t_end, count):
    """Log-spaced sample times with exact endpoints."""
    grid = np.geomspace(t0, t_end, count)
    grid[0], grid[-1] = t0, t_end
    return grid


def numeric_reference(p, schedules, horizon, integrator=None, samples=200):
    """Approximate saddle point from a long Tikhonov-regularized run.

    Integrates the regularized system from the origin to ``horizon`` and
    returns the sample with the smallest optimality residual. This is a
    numerical stand-in, not an exact saddle point.
    """
    f = make_rhs(Han(), p, schedules)
    lam0 = np.zeros(2 * (p.n + p.m))
    grid = sample_grid(schedules.t0, horizon, samples)
    traj = integrate(f, FlatState(schedules.t0, lam0), horizon, grid, integrator)
    best = min(traj, key=lambda st: saddle_residual(p, (st.lam[: p.n], st.lam[p.n : p.n + p.m])))
    return p.point(best.lam[: p.n], best.lam[p.n : p.n + p.m])


def _resolve_reference(config, p):
    mode = config.reference
    if mode == "none":
        return None, None
    if p.known_saddle is not None and mode in ("auto", "known"):
        return p.known_saddle, "known"
    if mode == "known":
        raise InvalidArgumentError("problem has no known saddle point")
    s = config.schedules
    horizon = config.reference_horizon * config.t_end
    ref = numeric_reference(p, s, horizon, config.integrator)
    return ref, "numeric"


def run(config):
    """Integrate one configured system and annotate its trajectory.

    Parameter conditions are checked on the effective schedules; violations
    are logged and recorded in ``condition_report`` but do not stop the run.

    Raises
    ------
    RunFailedError
        If integration fails; the partial annotated result is attached.
    """
    start = time.perf_counter()
    p = build_problem(config.problem, config.seed)
    eff = config.variant.effective_schedules(config.schedules)
    report = validate_conditions(eff)
    if not report.all_ok:
        log.warning(
            "%s: schedule conditions fail (%s); continuing",
            config.label or config.variant.tag,
            ", ".join(report.failures()),
        )
    regime = classify_regime(eff)
    ref, ref_kind = _resolve_reference(config, p)
    f = make_rhs(config.variant, p, config.schedules)
    lam0 = initial_state(config, p)
    t0 = config.schedules.t0
    grid = sample_grid(t0, config.t_end, config.sample_count)
    failure = None
    try:
        traj = integrate(f, FlatState(t0, lam0), config.t_end, grid, config.integrator)
        steps, rejections = traj.accepted_steps, traj.rejected_steps
    except NumericalBlowupError as exc:
        traj, failure = exc.partial, exc
        steps = getattr(traj, "accepted_steps", -1)
        rejections = getattr(traj, "rejected_steps", -1)
    samples = annotate(traj, p, eff, ref)
    result = RunResult(
        config=config,
        samples=samples,
        condition_report=report,
        regime=regime,
        wall_time=time.perf_counter() - start,
        steps=steps,
        rejections=rejections,
        reference_kind=ref_kind,
        failed=failure is not None,
        error=str(failure) if failure is not None else None,
    )
    if failure is not None:
        raise RunFailedError(str(failure), result)
    return result


def _worker_count(threads, jobs):
    if threads is None:
        threads = int(os.environ.get("SADDLEFLOW_THREADS", "1") or 1)
    return max(1, min(int(threads), jobs))


def sweep(configs, threads=None):
    """Run several configs, optionally in parallel worker processes.

    Results come back in input order. Parallelism is capped by ``threads``
    or the ``SADDLEFLOW_THREADS`` environment variable (default 1).
    """
    configs = list(configs)
    workers = _worker_count(threads, len(configs))
    if workers == 1:
        return [run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


def run_regression(
    dims=(100, 200),
    kappa=35.0,
    omega=0.1,
    a=100.0,
    eps=None,
    variant=None,
    t_end=20.0,
    seed=0,
    **kwargs,
):
    """Run Example 2 with its default schedules; ``eps`` defaults to ``10/t^2``."""
    config = example2_config(
        dims=dims, kappa=kappa, omega=omega, a=a, eps=eps, variant=variant,
        t_end=t_end, seed=seed, **kwargs,
    )
    return run(config)


@dataclass
class ComparisonRow:
    label: str
    variant: str
    final: float
    slope: Optional[float]


def compare(configs, metric="gap", window=None, threads=None, results=None):
    """Final metric value and fitted log-log slope for each config.

    All configs must share the problem and the time span. ``window`` defaults
    to the last decade ``[t_end / 10, t_end]``. Rows are sorted by final value.
    Pass ``results`` to reuse already computed runs.
    """
    configs = list(configs)
    if not configs:
        raise InvalidArgumentError("nothing to compare")
    first = configs[0]
    for c in configs[1:]:
        if c.problem != first.problem or c.span != first.span or c.seed != first.seed:
            raise InvalidArgumentError("compared configs must share problem, seed and span")
    if results is None:
        results = sweep(configs, threads)
    if window is None:
        window = (first.t_end / 10.0, first.t_end)
    rows = []
    for c, res in zip(configs, results):
        series = res.series(metric)
        if not series:
            raise InvalidArgumentError(f"metric {metric!r} is not available for {c.label!r}")
        try:
            slope = rate_slope(series, window)
        except InvalidArgumentError:
            slope = None
        rows.append(ComparisonRow(c.label or c.variant.tag, c.variant.tag, series[-1][1], slope))
    rows.sort(key=lambda r: r.final)
    return rows


def example1_config(eps=None, variant=None, label=None, **kwargs):
    """Example 1 settings: toy(1, 6, 4, 10), alpha = 17/t, beta = t, theta = 1/16.

    ``eps`` defaults to ``7 / t^2``.
    """
    eps = PowerTikhonov(7.0, 2.0) if eps is None else eps
    variant = Han() if variant is None else variant
    sched = ScheduleSet(PowerDamping(17.0), PowerScaling(1.0), eps, 1.0 / 16.0, 1.0)
    kwargs.setdefault("t_end", 20.0)
    return ExperimentConfig(
        problem=ProblemSpec("toy", EXAMPLE1_COEFFS),
        variant=variant,
        schedules=sched,
        label=label or variant.tag,
        **kwargs,
    )


def example2_config(
    dims=(100, 200), kappa=35.0, omega=0.1, a=100.0, eps=None, variant=None, label=None,
    **kwargs,
):
    """Example 2 settings: alpha = 7/t, beta = t, theta = 1/6, zero initial state.

    ``eps`` defaults to ``10 / t^2``.
    """
    eps = PowerTikhonov(10.0, 2.0) if eps is None else eps
    variant = Han() if variant is None else variant
    sched = ScheduleSet(PowerDamping(7.0), PowerScaling(1.0), eps, 1.0 / 6.0, 1.0)
    kwargs.setdefault("t_end", 20.0)
    kwargs.setdefault("reference", "none")
    return ExperimentConfig(
        problem=ProblemSpec("regression", dims=tuple(dims), kappa=float(kappa), omega=omega, a=a),
        variant=variant,
        schedules=sched,
        label=label or variant.tag,
        **kwargs,
    )


SWEEP_EXPONENTS = (1.2, 1.6, 2.0, 2.4, 2.8)


def preset_configs(name, **overrides):
    """Configs for a named preset.

    ``example1-tikhonov``, ``example1-notikhonov``, ``example1-sweep``,
    ``example1-vs-apdd`` and ``example2``. Keyword overrides are forwarded to
    the config builders.
    """
    if name == "example1-tikhonov":
        return [example1_config(label="han eps=7/t^2", **overrides)]
    if name == "example1-notikhonov":
        return [example1_config(variant=HanNoTikhonov(), label="han eps=0", **overrides)]
    if name == "example1-sweep":
        return [
            example1_config(eps=PowerTikhonov(7.0, r), label=f"han eps=7/t^{r}", **overrides)
            for r in SWEEP_EXPONENTS
        ]
    if name == "example1-vs-apdd":
        return [
            example1_config(label="han", **overrides),
            example1_config(variant=APDD(2.0), label="apdd alpha=2", **overrides),
            example1_config(variant=APDD(5.0), label="apdd alpha=5", **overrides),
        ]
    if name == "example2":
        return [example2_config(**overrides)]
    raise InvalidArgumentError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = (
    "example1-tikhonov",
    "example1-notikhonov",
    "example1-sweep",
    "example1-vs-apdd",
    "example2",
)
