"""Command-line front end.

Subcommands: spectrum, splitting, sweep, dispersion, evolve, compare.
Options come from flags, optionally backed by a plain key = value
config file (--config); flags win. Exit codes: 0 success, 2 bad
configuration or domain error, 3 capacity cap, 4 eigensolver failure.

Energies are in units of J by default (hbar = 1). Passing --j-hz F
declares that J corresponds to F hertz; outputs then carry parallel
entries in hertz and seconds using E_hz = E * F / J and
t_sec = t * J / (2 pi F).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .chain import ChainSpec
from .dynamics import evolve, noon_fidelity_curve
from .ed import low_spectrum, tunneling_splitting_ed
from .errors import CapacityError, ConfigError, ConvergenceError
from .free_fermion import bogoliubov_sector_oracle, dispersion
from .perturbation import RESOLVENT_MAX_SITES, characteristic_times, perturbation_summary
from .sweep import (
    REPORT_FORMATS,
    SWEEP_METHODS,
    SweepPlan,
    _compute_row,
    check_writable,
    emit_report,
    run_sweep,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingmqt",
        description="Ising-chain tunneling splittings, spectra, and NOON dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--n", type=int, help="number of spins")
        p.add_argument("--j", type=float, help="Ising coupling J (default 1)")
        p.add_argument("--hx", type=float, help="transverse field")
        p.add_argument("--boundary", choices=("periodic", "open"),
                       help="boundary condition (default periodic)")
        p.add_argument("--j-hz", type=float, dest="j_hz",
                       help="J expressed in hertz; adds Hz/seconds outputs")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=REPORT_FORMATS, dest="fmt",
                       help="output format")

    p = sub.add_parser("spectrum", help="lowest eigenvalues with sector labels")
    common(p)
    p.add_argument("--k", type=int, help="number of levels (default 6)")
    p.add_argument("--method", choices=("auto", "dense", "lanczos"),
                   help="eigensolver (default auto)")

    p = sub.add_parser("splitting", help="tunneling splitting by one or more methods")
    common(p)
    p.add_argument("--methods", help="comma list from "
                   f"{','.join(SWEEP_METHODS)} (default ed)")

    p = sub.add_parser("sweep", help="splitting sweep over hx or n")
    common(p)
    p.add_argument("--sweep", choices=("hx", "n"), help="swept variable")
    p.add_argument("--grid", help="a:b:step or comma list of values")
    p.add_argument("--methods", help="comma list of methods (default ed)")
    p.add_argument("--jobs", type=int, help="parallel workers (default 1)")

    p = sub.add_parser("dispersion", help="quasiparticle dispersion E(k)")
    common(p)
    p.add_argument("--n-points", type=int, dest="n_points",
                   help="momentum grid size (default 512)")

    p = sub.add_parser("evolve", help="NOON dynamics trace from |all down>")
    common(p)
    p.add_argument("--times", help="t0:t1:npoints evolution grid")
    p.add_argument("--n-points", type=int, dest="n_points",
                   help="points in the default grid (default 512)")

    p = sub.add_parser("compare", help="all splitting methods side by side")
    common(p)
    return parser


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _get(args, cfg, key, cast=None, default=None, required=False):
    """Flag value if given, else config value, else default."""
    value = getattr(args, key, None)
    if value is None and key in cfg:
        raw = cfg[key]
        try:
            value = cast(raw) if cast is not None else raw
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"config key {key!r}: bad value {raw!r} ({exc})")
    if value is None:
        if required:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        value = default
    return value


def _spec_from(args, cfg, *, need_n=True, need_hx=True, default_n=None) -> ChainSpec:
    n = _get(args, cfg, "n", int, default=default_n, required=need_n and default_n is None)
    j = _get(args, cfg, "j", float, default=1.0)
    hx = _get(args, cfg, "hx", float, required=need_hx)
    boundary = _get(args, cfg, "boundary", str, default="periodic")
    if boundary not in ("periodic", "open"):
        raise ConfigError(f"boundary must be periodic or open, got {boundary!r}")
    return ChainSpec(n_sites=n, coupling_j=j, field_hx=hx if hx is not None else 0.0,
                     boundary=boundary)


def _parse_grid(text: str) -> tuple:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r}: expected a:b:step")
        try:
            a, b, step = (float(x) for x in parts)
        except ValueError:
            raise ConfigError(f"grid {text!r}: non-numeric bound or step")
        if step <= 0:
            raise ConfigError(f"grid step must be > 0, got {step!r}")
        if b < a:
            raise ConfigError(f"grid end {b!r} is below start {a!r}")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(a + i * step for i in range(count))
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"grid {text!r}: non-numeric entry")
    if not values:
        raise ConfigError("grid is empty")
    return values


def _parse_times(text: str) -> np.ndarray:
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ConfigError(f"times {text!r}: expected t0:t1:npoints")
    try:
        t0, t1 = float(parts[0]), float(parts[1])
        npoints = int(parts[2])
    except ValueError:
        raise ConfigError(f"times {text!r}: non-numeric entry")
    if npoints < 2:
        raise ConfigError(f"times needs at least 2 points, got {npoints}")
    if not t1 > t0:
        raise ConfigError(f"times end {t1!r} must exceed start {t0!r}")
    return np.linspace(t0, t1, npoints)


def _parse_methods(text: str | None) -> tuple[str, ...]:
    if text is None:
        return ("ed",)
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    if not methods:
        raise ConfigError("methods list is empty")
    for m in methods:
        if m not in SWEEP_METHODS:
            raise ConfigError(f"unknown method {m!r}; expected one of {SWEEP_METHODS}")
    return methods


def _hz(spec: ChainSpec, j_hz: float, energy: float | None) -> float | None:
    return None if energy is None else energy * j_hz / spec.coupling_j


def _seconds(spec: ChainSpec, j_hz: float, t: float | None) -> float | None:
    return None if t is None else t * spec.coupling_j / (2.0 * math.pi * j_hz)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        check_writable(out)
        with open(out, "w") as fh:
            fh.write(text)


def _spec_header(spec: ChainSpec) -> dict:
    return {"n": spec.n_sites, "j": spec.coupling_j, "hx": spec.field_hx,
            "boundary": spec.boundary.value}


def cmd_spectrum(args, cfg) -> int:
    spec = _spec_from(args, cfg)
    k = _get(args, cfg, "k", int, default=6)
    method = _get(args, cfg, "method", str, default="auto")
    fmt = _get(args, cfg, "fmt", str, default="csv")
    out = _get(args, cfg, "out", str)
    j_hz = _get(args, cfg, "j_hz", float)
    levels = low_spectrum(spec, k=k, method=method)
    if fmt == "csv":
        lines = ["index,energy,sector"]
        lines += [f"{i},{lv.energy:.17g},{int(lv.sector)}" for i, lv in enumerate(levels)]
        _emit("\n".join(lines) + "\n", out)
    elif fmt == "json":
        doc = _spec_header(spec)
        doc["levels"] = [{"energy": lv.energy, "sector": int(lv.sector)} for lv in levels]
        if j_hz is not None:
            doc["levels_hz"] = [_hz(spec, j_hz, lv.energy) for lv in levels]
        _emit(json.dumps(doc, indent=2) + "\n", out)
    else:
        raise ConfigError(f"spectrum supports csv or json, not {fmt!r}")
    return 0


def cmd_splitting(args, cfg) -> int:
    spec = _spec_from(args, cfg)
    methods = _parse_methods(_get(args, cfg, "methods", str))
    fmt = _get(args, cfg, "fmt", str, default="json")
    out = _get(args, cfg, "out", str)
    j_hz = _get(args, cfg, "j_hz", float)
    results = []
    for m in methods:
        delta, flags, record = _compute_row(spec, m)
        results.append({"method": m, "delta_e": delta, "flags": flags, "record": record})
    if fmt == "json":
        doc = _spec_header(spec)
        doc["results"] = results
        if j_hz is not None:
            doc["conversion"] = {
                "j_hz": j_hz,
                "delta_e_hz": {r["method"]: _hz(spec, j_hz, r["delta_e"]) for r in results},
            }
        _emit(json.dumps(doc, indent=2) + "\n", out)
    elif fmt == "csv":
        lines = ["method,n,j,hx,boundary,delta_e,flags"]
        for r in results:
            lines.append(
                f"{r['method']},{spec.n_sites},{spec.coupling_j:.17g},"
                f"{spec.field_hx:.17g},{spec.boundary.value},"
                f"{r['delta_e']:.17g},{';'.join(r['flags'])}"
            )
        _emit("\n".join(lines) + "\n", out)
    else:
        raise ConfigError(f"splitting supports csv or json, not {fmt!r}")
    return 0


def cmd_sweep(args, cfg) -> int:
    variable = _get(args, cfg, "sweep", str, required=True)
    if variable not in ("hx", "n"):
        raise ConfigError(f"--sweep must be hx or n, got {variable!r}")
    grid_text = _get(args, cfg, "grid", str, required=True)
    grid = _parse_grid(grid_text)
    methods = _parse_methods(_get(args, cfg, "methods", str))
    fmt = _get(args, cfg, "fmt", str, default="csv")
    out = _get(args, cfg, "out", str)
    jobs = _get(args, cfg, "jobs", int, default=1)
    if variable == "hx":
        base = _spec_from(args, cfg, need_hx=False)
        base = ChainSpec(base.n_sites, base.coupling_j, float(grid[0]), base.boundary)
    else:
        args_n = _get(args, cfg, "n", int)
        if args_n is not None:
            raise ConfigError("--n conflicts with sweeping n; the grid sets it")
        j = _get(args, cfg, "j", float, default=1.0)
        hx = _get(args, cfg, "hx", float, required=True)
        boundary = _get(args, cfg, "boundary", str, default="periodic")
        base = ChainSpec(int(grid[0]), j, hx, boundary)
    plan = SweepPlan(base=base, variable=variable, grid=grid, methods=methods, out=out)
    result = run_sweep(plan, jobs=jobs)
    text = emit_report(result, fmt=fmt, out=out)
    if out is None:
        sys.stdout.write(text)
    return 0


def cmd_dispersion(args, cfg) -> int:
    spec = _spec_from(args, cfg, default_n=2)
    n_points = _get(args, cfg, "n_points", int, default=512)
    fmt = _get(args, cfg, "fmt", str, default="csv")
    out = _get(args, cfg, "out", str)
    curve = dispersion(spec, n_points=n_points)
    if fmt == "csv":
        _emit(curve.to_csv(), out)
    elif fmt == "json":
        doc = _spec_header(spec)
        doc.update({
            "momenta": curve.momenta.tolist(),
            "energies": curve.energies.tolist(),
            "gap_numeric": curve.gap_numeric,
            "gap_paper_formula": curve.gap_paper_formula,
            "flags": list(curve.flags),
        })
        _emit(json.dumps(doc, indent=2) + "\n", out)
    else:
        raise ConfigError(f"dispersion supports csv or json, not {fmt!r}")
    return 0


def cmd_evolve(args, cfg) -> int:
    spec = _spec_from(args, cfg)
    times_text = _get(args, cfg, "times", str)
    n_points = _get(args, cfg, "n_points", int, default=512)
    out = _get(args, cfg, "out", str)
    j_hz = _get(args, cfg, "j_hz", float)
    if out is not None:
        check_writable(out)
    times = _parse_times(times_text) if times_text is not None else None
    trace = evolve(spec, times=times, n_points=n_points)
    if out is None:
        sys.stdout.write(trace.to_csv())
        return 0
    with open(out, "w") as fh:
        fh.write(trace.to_csv())
    summary = noon_fidelity_curve(trace).to_dict()
    if j_hz is not None:
        summary["conversion"] = {
            "j_hz": j_hz,
            "t_star_seconds": _seconds(spec, j_hz, summary["t_star"]),
            "period_seconds": _seconds(spec, j_hz, summary["period_measured"]),
            "delta_e_implied_hz": _hz(spec, j_hz, summary["delta_e_implied"]),
        }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_compare(args, cfg) -> int:
    spec = _spec_from(args, cfg)
    fmt = _get(args, cfg, "fmt", str, default="json")
    out = _get(args, cfg, "out", str)
    j_hz = _get(args, cfg, "j_hz", float)

    ed_rec = tunneling_splitting_ed(spec)
    ff_rec = bogoliubov_sector_oracle(spec)
    pert = None
    if spec.is_perturbative and spec.field_hx > 0:
        pert = perturbation_summary(
            spec,
            include_resolvent=spec.n_sites <= RESOLVENT_MAX_SITES,
            delta_e_ed=ed_rec.delta_e,
        )

    def ratio(x):
        if x is None or ed_rec.delta_e == 0:
            return None
        return x / ed_rec.delta_e

    deltas = {
        "ed": ed_rec.delta_e,
        "free_fermion": ff_rec.delta_e,
        "closed_form": pert.delta_e_closed if pert else None,
        "resolvent": pert.delta_e_resolvent if pert else None,
    }
    doc = _spec_header(spec)
    doc["ed"] = ed_rec.to_dict()
    doc["free_fermion"] = ff_rec.to_dict()
    doc["perturbation"] = pert.to_dict() if pert else None
    doc["ratios"] = {
        "free_fermion_over_ed": ratio(deltas["free_fermion"]),
        "closed_form_over_ed": ratio(deltas["closed_form"]),
        "resolvent_over_ed": ratio(deltas["resolvent"]),
    }
    doc["times"] = None
    if ed_rec.delta_e > 0:
        times = characteristic_times(ed_rec.delta_e)
        doc["times"] = {k: float(v) for k, v in times.items()}
    if j_hz is not None:
        doc["conversion"] = {
            "j_hz": j_hz,
            "delta_e_hz": {k: _hz(spec, j_hz, v) for k, v in deltas.items()},
            "times_seconds": None if doc["times"] is None else {
                k: _seconds(spec, j_hz, v) for k, v in doc["times"].items()
            },
        }
    if fmt == "json":
        _emit(json.dumps(doc, indent=2) + "\n", out)
    elif fmt == "csv":
        lines = ["method,delta_e,ratio_to_ed"]
        for name in ("ed", "free_fermion", "closed_form", "resolvent"):
            d = deltas[name]
            r = 1.0 if name == "ed" and d is not None else ratio(d)
            d_s = "" if d is None else f"{d:.17g}"
            r_s = "" if r is None else f"{r:.17g}"
            lines.append(f"{name},{d_s},{r_s}")
        _emit("\n".join(lines) + "\n", out)
    else:
        raise ConfigError(f"compare supports csv or json, not {fmt!r}")
    return 0


_HANDLERS = {
    "spectrum": cmd_spectrum,
    "splitting": cmd_splitting,
    "sweep": cmd_sweep,
    "dispersion": cmd_dispersion,
    "evolve": cmd_evolve,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        return _HANDLERS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
