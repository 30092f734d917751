"""Parameter sweeps over hx or N with per-row fault isolation.

A sweep runs (grid point x method) jobs, each producing one row. A row
that fails (capacity cap, domain error, non-convergence) records the
error string and leaves the numbers null; it never aborts the sweep.
Rows are keyed by (grid index, method index), so parallel execution
reassembles into exactly the serial output.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .chain import Boundary, ChainSpec
from .ed import tunneling_splitting_ed
from .errors import CapacityError, ConfigError, ConvergenceError
from .free_fermion import bogoliubov_sector_oracle
from .perturbation import perturbation_summary, resolvent_oracle

SWEEP_METHODS = ("dense", "lanczos", "ed", "closed_form", "resolvent", "free_fermion")
SWEEP_VARIABLES = ("hx", "n")
REPORT_FORMATS = ("csv", "json", "gnuplot-data")


def check_writable(path: str) -> None:
    """Reject an output path that cannot be written, before any compute."""
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise ConfigError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise ConfigError(f"output directory is not writable: {parent}")
    if os.path.exists(path):
        if os.path.isdir(path):
            raise ConfigError(f"output path is a directory: {path}")
        if not os.access(path, os.W_OK):
            raise ConfigError(f"output file is not writable: {path}")


@dataclass(frozen=True)
class SweepPlan:
    """Validated description of one sweep; construction rejects bad plans."""

    base: ChainSpec
    variable: str
    grid: tuple
    methods: tuple[str, ...]
    out: str | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}"
            )
        grid = tuple(self.grid)
        if not grid:
            raise ConfigError("sweep grid is empty")
        arr = np.asarray(grid, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ConfigError("sweep grid contains non-finite values")
        if arr.size > 1 and not np.all(np.diff(arr) > 0):
            raise ConfigError("sweep grid must be strictly increasing")
        if self.variable == "n":
            if not np.all(arr == np.round(arr)):
                raise ConfigError("n grid values must be integers")
            if arr.min() < 2:
                raise ConfigError("n grid values must be >= 2")
            grid = tuple(int(v) for v in arr)
        else:
            if arr.min() < 0:
                raise ConfigError("hx grid values must be >= 0")
            grid = tuple(float(v) for v in arr)
        object.__setattr__(self, "grid", grid)
        methods = tuple(self.methods)
        if not methods:
            raise ConfigError("sweep needs at least one method")
        for m in methods:
            if m not in SWEEP_METHODS:
                raise ConfigError(
                    f"unknown method {m!r}; expected one of {SWEEP_METHODS}"
                )
        object.__setattr__(self, "methods", methods)

    def spec_at(self, value) -> ChainSpec:
        if self.variable == "hx":
            return ChainSpec(self.base.n_sites, self.base.coupling_j,
                             float(value), self.base.boundary)
        return ChainSpec(int(value), self.base.coupling_j,
                         self.base.field_hx, self.base.boundary)


@dataclass(frozen=True)
class SweepResult:
    plan: SweepPlan
    rows: tuple[dict, ...]


def _compute_row(spec: ChainSpec, method: str) -> tuple[float, list[str], dict]:
    """(headline delta_e, flags, full record dict) for one method."""
    if method in ("dense", "lanczos", "ed"):
        rec = tunneling_splitting_ed(spec, method="auto" if method == "ed" else method)
        return rec.delta_e, list(rec.flags), rec.to_dict()
    if method == "free_fermion":
        rec = bogoliubov_sector_oracle(spec)
        return rec.delta_e, list(rec.flags), rec.to_dict()
    if method == "closed_form":
        res = perturbation_summary(spec, include_resolvent=False)
        return res.delta_e_closed, [], res.to_dict()
    # resolvent: raise the capacity error eagerly so the row records it
    oracle = resolvent_oracle(spec)
    res = perturbation_summary(spec, include_resolvent=False)
    res = replace(res, delta_e_resolvent=oracle.splitting, sign_resolvent=oracle.sign)
    return oracle.splitting, [], res.to_dict()


def _run_one(plan: SweepPlan, index: int, value, method: str) -> dict:
    spec = plan.spec_at(value)
    row = {
        "index": index,
        "method": method,
        "x": value,
        "n": spec.n_sites,
        "j": spec.coupling_j,
        "hx": spec.field_hx,
        "boundary": spec.boundary.value,
        "delta_e": None,
        "flags": [],
        "error": None,
        "record": None,
    }
    try:
        delta, flags, record = _compute_row(spec, method)
    except (CapacityError, ConvergenceError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row["delta_e"] = delta
    row["flags"] = flags
    row["record"] = record
    return row


def run_sweep(plan: SweepPlan, jobs: int = 1) -> SweepResult:
    """Execute the plan; rows come back sorted by (grid index, method index)."""
    if plan.out is not None:
        check_writable(plan.out)
    tasks = [
        (i, value, method)
        for i, value in enumerate(plan.grid)
        for method in plan.methods
    ]
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda t: _run_one(plan, *t), tasks))
    else:
        rows = [_run_one(plan, *t) for t in tasks]
    return SweepResult(plan=plan, rows=tuple(rows))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _csv_report(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "method", "x", "n", "j", "hx", "boundary",
                     "delta_e", "flags", "error"])
    for row in result.rows:
        writer.writerow([
            row["index"], row["method"], _fmt(row["x"]), row["n"],
            _fmt(row["j"]), _fmt(row["hx"]), row["boundary"],
            _fmt(row["delta_e"]), ";".join(row["flags"]), row["error"] or "",
        ])
    return buf.getvalue()


def _json_report(result: SweepResult) -> str:
    doc = {
        "variable": result.plan.variable,
        "methods": list(result.plan.methods),
        "grid": list(result.plan.grid),
        "rows": list(result.rows),
    }
    return json.dumps(doc, indent=2) + "\n"


def _gnuplot_report(result: SweepResult) -> str:
    lines = [f"# sweep over {result.plan.variable}", "# columns: x delta_e"]
    for method in result.plan.methods:
        lines.append(f"# method: {method}")
        for row in result.rows:
            if row["method"] != method:
                continue
            if row["error"] is not None:
                lines.append(f"# x = {_fmt(row['x'])} failed: {row['error']}")
            else:
                lines.append(f"{_fmt(row['x'])} {_fmt(row['delta_e'])}")
        lines.append("")
    return "\n".join(lines)


def emit_report(result: SweepResult, fmt: str = "csv", out: str | None = None) -> str:
    """Render rows in one of the supported formats; bit-stable per input."""
    if fmt not in REPORT_FORMATS:
        raise ConfigError(f"unknown format {fmt!r}; expected one of {REPORT_FORMATS}")
    if fmt == "csv":
        text = _csv_report(result)
    elif fmt == "json":
        text = _json_report(result)
    else:
        text = _gnuplot_report(result)
    target = out if out is not None else result.plan.out
    if target is not None:
        check_writable(target)
        with open(target, "w") as fh:
            fh.write(text)
    return text


_ROW_SCHEMA = {
    "type": "object",
    "properties": {
        "index": {"type": "integer", "minimum": 0},
        "method": {"enum": list(SWEEP_METHODS)},
        "x": {"type": "number"},
        "n": {"type": "integer", "minimum": 2},
        "j": {"type": "number"},
        "hx": {"type": "number"},
        "boundary": {"enum": ["open", "periodic"]},
        "delta_e": {"type": ["number", "null"]},
        "flags": {"type": "array", "items": {"type": "string"}},
        "error": {"type": ["string", "null"]},
        "record": {"type": ["object", "null"]},
    },
    "required": ["index", "method", "x", "n", "j", "hx", "boundary",
                 "delta_e", "flags", "error", "record"],
    "additionalProperties": False,
}

SWEEP_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "variable": {"enum": list(SWEEP_VARIABLES)},
        "methods": {"type": "array", "items": {"enum": list(SWEEP_METHODS)}},
        "grid": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "rows": {"type": "array", "items": _ROW_SCHEMA},
    },
    "required": ["variable", "methods", "grid", "rows"],
    "additionalProperties": False,
}
