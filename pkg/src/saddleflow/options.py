"""Flat ``key = value`` experiment documents, schedule flags and CLI presets.

Schedule mini-grammar (frozen):

* damping ``alpha``: ``power:<a>`` (``a/t``; an optional exponent must be 1),
  ``case2:<a>`` (``(2 a t - 2)/t^2``)
* scaling ``beta``: ``power:<b>`` (``t^b``), ``const:<c>``
* Tikhonov ``eps``: ``power:<c>,<r>`` (``c/t^r``), ``case2:<b>`` (``3/t^(b+3)``),
  ``zero``

Numbers may be written as fractions, e.g. ``theta = 1/16``.
"""

from dataclasses import replace
from fractions import Fraction

from .dynamics import variant_from_tag
from .errors import InvalidArgumentError
from .experiments import ExperimentConfig, ProblemSpec, EXAMPLE1_COEFFS
from .integrator import IntegratorConfig
from .schedules import (
    Case2Damping,
    Case2Tikhonov,
    ConstantScaling,
    PowerDamping,
    PowerScaling,
    PowerTikhonov,
    ScheduleSet,
    ZeroTikhonov,
)

__all__ = [
    "CONFIG_KEYS",
    "PRESET_OPTIONS",
    "parse_number",
    "parse_damping",
    "parse_scaling",
    "parse_tikhonov",
    "parse_config_text",
    "load_config_file",
    "build_configs",
    "config_help",
]

# key -> (description, default)
CONFIG_KEYS = {
    "preset": ("named preset supplying defaults for every other key", None),
    "problem": ("toy | regression", "toy"),
    "coeffs": ("toy coefficients mc,nc,jc,kc", "1,6,4,10"),
    "dims": ("regression dimensions MxN (K is M x N)", "100x200"),
    "kappa": ("condition number of K", "35"),
    "sigma_max": ("largest singular value of K", "1"),
    "omega": ("regularization weight", "0.1"),
    "a": ("smoothing parameter of the smoothed L1 term", "100"),
    "variant": ("han | han_no_tikhonov | mpdd | apdd", "han"),
    "apdd_alpha": ("APDD damping constant (variant = apdd)", None),
    "alpha": ("damping schedule: power:<a> | case2:<a>", "power:17"),
    "beta": ("scaling schedule: power:<b> | const:<c>", "power:1"),
    "eps": ("Tikhonov schedule: power:<c>,<r> | case2:<b> | zero", "power:7,2"),
    "theta": ("extrapolation constant", "1/16"),
    "t0": ("initial time", "1"),
    "t_end": ("final time", "20"),
    "samples": ("number of log-spaced sample times", "400"),
    "seed": ("64-bit RNG seed", "0"),
    "rtol": ("integrator relative tolerance", "1e-8"),
    "atol": ("integrator absolute tolerance", "1e-10"),
    "h_max": ("largest integrator step", "1"),
    "max_steps": ("integrator step budget", "2000000"),
    "initial": ("initial state rule: auto | example1 | zeros", "auto"),
    "reference": ("gap reference: auto | known | dynamics | none", "auto"),
    "label": ("free-form run label", None),
}

_EX1 = {
    "problem": "toy",
    "coeffs": "1,6,4,10",
    "alpha": "power:17",
    "beta": "power:1",
    "theta": "1/16",
    "eps": "power:7,2",
    "t0": "1",
    "t_end": "20",
}
_EX2 = {
    "problem": "regression",
    "dims": "100x200",
    "kappa": "35",
    "omega": "0.1",
    "a": "100",
    "alpha": "power:7",
    "beta": "power:1",
    "theta": "1/6",
    "eps": "power:10,2",
    "t0": "1",
    "t_end": "20",
    "reference": "none",
}

PRESET_OPTIONS = {
    "example1-tikhonov": [dict(_EX1, label="han eps=7/t^2")],
    "example1-notikhonov": [dict(_EX1, variant="han_no_tikhonov", label="han eps=0")],
    "example1-sweep": [
        dict(_EX1, eps=f"power:7,{r}", label=f"han eps=7/t^{r}")
        for r in ("1.2", "1.6", "2.0", "2.4", "2.8")
    ],
    "example1-vs-apdd": [
        dict(_EX1, label="han"),
        dict(_EX1, variant="apdd", apdd_alpha="2", label="apdd alpha=2"),
        dict(_EX1, variant="apdd", apdd_alpha="5", label="apdd alpha=5"),
    ],
    "example2": [dict(_EX2, label="han")],
}


def parse_number(text):
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise InvalidArgumentError(f"not a number: {text!r}") from None


def _split(spec):
    name, _, args = str(spec).strip().partition(":")
    vals = [parse_number(a) for a in args.split(",")] if args else []
    return name.lower(), vals


def parse_damping(spec):
    name, vals = _split(spec)
    if name == "power" and len(vals) in (1, 2):
        if len(vals) == 2 and vals[1] != 1.0:
            raise InvalidArgumentError("power damping only supports a/t (exponent 1)")
        return PowerDamping(vals[0])
    if name == "case2" and len(vals) == 1:
        return Case2Damping(vals[0])
    raise InvalidArgumentError(f"bad damping schedule {spec!r}; use power:<a> or case2:<a>")


def parse_scaling(spec):
    name, vals = _split(spec)
    if name == "power" and len(vals) == 1:
        return PowerScaling(vals[0])
    if name == "const" and len(vals) == 1:
        return ConstantScaling(vals[0])
    raise InvalidArgumentError(f"bad scaling schedule {spec!r}; use power:<b> or const:<c>")


def parse_tikhonov(spec):
    name, vals = _split(spec)
    if name == "zero" and not vals:
        return ZeroTikhonov()
    if name == "power" and len(vals) == 2:
        return PowerTikhonov(vals[0], vals[1])
    if name == "case2" and len(vals) == 1:
        return Case2Tikhonov(vals[0])
    raise InvalidArgumentError(
        f"bad Tikhonov schedule {spec!r}; use power:<c>,<r>, case2:<b> or zero"
    )


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise InvalidArgumentError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in CONFIG_KEYS:
            raise InvalidArgumentError(f"line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def load_config_file(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def _dims(text):
    try:
        m, n = (int(v) for v in str(text).lower().split("x"))
    except ValueError:
        raise InvalidArgumentError(f"dims must look like MxN, got {text!r}") from None
    return m, n


def _single_config(opts):
    get = lambda k: opts.get(k, CONFIG_KEYS[k][1])
    kind = get("problem")
    spec = ProblemSpec(
        kind=kind,
        coeffs=tuple(parse_number(c) for c in get("coeffs").split(",")),
        dims=_dims(get("dims")),
        kappa=parse_number(get("kappa")),
        sigma_max=parse_number(get("sigma_max")),
        omega=parse_number(get("omega")),
        a=parse_number(get("a")),
    )
    if len(spec.coeffs) != 4:
        raise InvalidArgumentError("coeffs needs four comma-separated values")
    if kind == "regression":
        spec = replace(spec, coeffs=EXAMPLE1_COEFFS)
    else:
        spec = replace(spec, dims=(100, 200))
    apdd_alpha = opts.get("apdd_alpha")
    variant = variant_from_tag(
        get("variant"), None if apdd_alpha is None else parse_number(apdd_alpha)
    )
    sched = ScheduleSet(
        parse_damping(get("alpha")),
        parse_scaling(get("beta")),
        parse_tikhonov(get("eps")),
        parse_number(get("theta")),
        parse_number(get("t0")),
    )
    integ = IntegratorConfig(
        rtol=parse_number(get("rtol")),
        atol=parse_number(get("atol")),
        h_max=parse_number(get("h_max")),
        max_steps=int(parse_number(get("max_steps"))),
    )
    return ExperimentConfig(
        problem=spec,
        variant=variant,
        schedules=sched,
        t_end=parse_number(get("t_end")),
        sample_count=int(parse_number(get("samples"))),
        seed=int(get("seed")),
        integrator=integ,
        initial=get("initial"),
        reference=get("reference"),
        label=opts.get("label") or variant.tag,
    )


def build_configs(options):
    """Turn merged options into one or more :class:`ExperimentConfig`.

    A ``preset`` key expands into its option sets; every other key given in
    ``options`` overrides the preset value in each set.
    """
    options = {k: v for k, v in options.items() if v is not None}
    for k in options:
        if k not in CONFIG_KEYS:
            raise InvalidArgumentError(f"unknown option {k!r}")
    preset = options.pop("preset", None)
    if preset is None:
        bases = [{}]
    elif preset in PRESET_OPTIONS:
        bases = PRESET_OPTIONS[preset]
    else:
        raise InvalidArgumentError(
            f"unknown preset {preset!r}; choose from {', '.join(PRESET_OPTIONS)}"
        )
    try:
        return [_single_config(dict(base, **options)) for base in bases]
    except ValueError as exc:
        raise InvalidArgumentError(str(exc)) from None


def config_help():
    lines = ["Config documents hold one 'key = value' per line ('#' starts a comment).",
             "Command-line flags override file values. Keys:", ""]
    for k, (desc, default) in CONFIG_KEYS.items():
        d = f" [default: {default}]" if default is not None else ""
        lines.append(f"  {k:<11} {desc}{d}")
    lines += ["", "Presets: " + ", ".join(PRESET_OPTIONS)]
    return "\n".join(lines)
