"""CSV and JSON serialization of run results.

CSV layout: ``# key: value`` header lines, one column-name line, then one
row per sample. Numbers use 17 significant digits so parsing reproduces
every stored double exactly; undefined metrics are empty cells. A run that
failed mid-integration ends with a ``# FAILED: ...`` marker line.
"""

import csv
import datetime
import io
import json

from . import __version__

__all__ = ["BASE_COLUMNS", "columns_for", "header_for", "write_csv", "read_csv", "write_json"]

BASE_COLUMNS = (
    "t",
    "gap",
    "norm_xy",
    "dist_minnorm",
    "speed_x",
    "speed_y",
    "grad_res_f",
    "grad_res_g",
    "e_fast",
    "e_slow",
)


def _fmt(v):
    if v is None:
        return ""
    return format(float(v), ".17g")


def columns_for(result):
    cols = list(BASE_COLUMNS)
    if result.config.problem.kind == "regression" or any(
        s.phi is not None for s in result.samples
    ):
        cols.append("phi")
    return cols


def header_for(result, deterministic=False):
    """Ordered header fields describing a run."""
    cfg = result.config
    h = {"tool": f"saddleflow {__version__}"}
    if not deterministic:
        h["created"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        h["wall_time_s"] = f"{result.wall_time:.3f}"
    for k, v in cfg.describe().items():
        h[f"config.{k}"] = v
    h["seed"] = cfg.seed
    h["integrator.rtol"] = cfg.integrator.rtol
    h["integrator.atol"] = cfg.integrator.atol
    h["integrator.method"] = "dormand-prince-5(4), steps land on sample times"
    reg = result.regime
    h["regime"] = (
        f"{reg.kind} strong_convergence={str(reg.strong_convergence_flag).lower()} "
        f"method={reg.method}"
    )
    rep = result.condition_report
    failed = rep.failures()
    h["conditions"] = " ".join(
        f"{k}={'FAIL' if k in failed else 'ok'}({rep.worst_margin[k]:.6g})"
        for k in ("damping", "scaling", "tikhonov_growth", "eps_monotone")
    )
    h["reference"] = result.reference_kind or "none"
    h["solver.steps"] = result.steps
    h["solver.rejections"] = result.rejections
    return h


def _rows(result, cols):
    for s in result.samples:
        yield [_fmt(s.t)] + [_fmt(getattr(s, c)) for c in cols[1:]]


def write_csv(result, path, deterministic=False):
    cols = columns_for(result)
    buf = io.StringIO()
    for k, v in header_for(result, deterministic).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    w.writerows(_rows(result, cols))
    if result.failed:
        buf.write(f"# FAILED: {result.error}\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path):
    """Parse a file written by :func:`write_csv`.

    Returns ``(header, rows, failed)`` with rows as dicts of floats or ``None``.
    """
    header, lines, failed = {}, [], False
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# FAILED:"):
                failed = True
            elif line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                header[key] = value
            else:
                lines.append(line)
    reader = csv.reader(lines)
    cols = next(reader)
    rows = [{c: (float(v) if v != "" else None) for c, v in zip(cols, rec)} for rec in reader]
    return header, rows, failed


def write_json(result, path, deterministic=False):
    cols = columns_for(result)
    doc = {
        "header": {k: v for k, v in header_for(result, deterministic).items()},
        "columns": cols,
        "rows": [{c: getattr(s, c) for c in cols} for s in result.samples],
        "failed": result.failed,
    }
    if result.failed:
        doc["error"] = result.error
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, default=str)
        fh.write("\n")
