"""Command line front end.

Subcommands ``spectrum``, ``respond``, ``compare`` and ``classify`` read a
scenario file and write tables (CSV or JSON), a JSON summary and figures
into the output directory.  Exit codes: 0 success, 2 configuration error,
3 unsupported or critical regime for the requested route, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .critical import respond_critical
from .errors import (ConfigError, CriticalCoefficientError, DomainError, ExpansionInvalidError,
                     MeshError, NumericalFailure, UnsupportedRegimeError)
from .fem import assemble, fem_eigenvalues, fem_time_response, spectrum_csv, spurious_report
from .green import build_expansion
from .params import classify, rationalize_position
from .response import Grid, ModalKernel, ResponseField, respond_kernel, respond_modal
from .scenario import Scenario, load_scenario
from .spectrum import cluster_lines, compute_spectrum

log = logging.getLogger("barwave")

EXIT_OK, EXIT_CONFIG, EXIT_REGIME, EXIT_NUMERIC = 0, 2, 3, 4


# -- solving -----------------------------------------------------------------------

def _fem_steps(scn: Scenario, n_elements: int, T: float, nt: int):
    """Step size and save stride so that saved FEM times fall on the output grid."""
    target = scn.solver.dt or scn.params.L / (n_elements * scn.params.c)
    interval = T / max(nt - 1, 1)
    stride = max(1, int(math.ceil(interval / target - 1e-9)))
    return interval / stride, stride


def solve_fem(scn: Scenario) -> ResponseField:
    model = assemble(scn.params, scn.solver.n_elements, scn.solver.lumped)
    T = float(scn.grid.t[-1])
    dt, stride = _fem_steps(scn, model.n_elements, T, len(scn.grid.t))
    return fem_time_response(model, scn.initial, scn.forcing, dt, T, save_every=stride)


def solve(scn: Scenario, grid: Optional[Grid] = None, mode: Optional[str] = None) -> ResponseField:
    """Route a scenario to a solver.

    ``auto`` sends critical parameter sets to the closed-form kernels and
    everything else to the modal series; the modal expansion is never built
    when a critical flag is set.
    """
    grid = grid or scn.grid
    mode = mode or scn.solver.mode
    p = scn.params
    cls = classify(p, rationalize_position(p.a, p.L, scn.solver.max_denominator))
    if mode == "fem":
        return solve_fem(scn)
    if cls.is_critical:
        if mode == "modal":
            raise ExpansionInvalidError(
                f"critical parameters {sorted(cls.critical_flags)}: the modal series does not apply")
        return respond_critical(p, scn.initial, scn.forcing, grid)
    if mode == "critical":
        raise UnsupportedRegimeError("solver.mode=critical needs some h_i = 1")
    expansion = build_expansion(p, scn.solver.N, scn.solver.max_denominator)
    if mode == "kernel":
        field = respond_kernel(ModalKernel(expansion), scn.initial, scn.forcing, expansion.params, grid)
        field.meta["N"] = scn.solver.N
        return field
    return respond_modal(expansion, scn.initial, scn.forcing, grid)


# -- output helpers --------------------------------------------------------------------

def _write(out: Path, name: str, text: str, written: list) -> None:
    path = out / name
    path.write_text(text, encoding="utf-8")
    written.append(path.name)


def _figure(fn, written: list, *args, **kw) -> None:
    try:
        written.append(fn(*args, **kw).name)
    except Exception as exc:  # figures are a convenience; never fail a run over one
        log.warning("figure %s skipped: %s", args[-1] if args else "", exc)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _summary(out: Path, payload: dict, written: list) -> dict:
    payload = dict(payload)
    payload["outputs"] = sorted(set(written + ["summary.json"]))
    (out / "summary.json").write_text(json.dumps(_jsonable(payload), indent=2) + "\n", encoding="utf-8")
    return payload


# -- commands ------------------------------------------------------------------------

def cmd_spectrum(scn: Scenario, out: Path, fmt: str, figures: bool = True) -> dict:
    n_range = scn.solver.n_range if scn.solver.n_range is not None else scn.solver.N
    spec = compute_spectrum(scn.params, n_range, scn.solver.max_denominator)
    written: list = []
    if fmt == "csv":
        _write(out, "spectrum.csv", spec.to_csv(), written)
    else:
        rows = [dict(zip(("k", "n", "re_s", "im_s", "abs_z", "arg_z"), r)) for r in spec.rows()]
        _write(out, "spectrum.json", json.dumps(_jsonable(rows)) + "\n", written)
    lines = cluster_lines([lad.re_line for lad in spec.ladders])
    if figures:
        from .plotting import plot_spectrum
        _figure(plot_spectrum, written, spec.eigenvalues(), out / "spectrum.png",
                title=f"{scn.name}: a/L = {spec.position.q}/{spec.position.p}", re_lines=lines)
    return _summary(out, {
        "command": "spectrum",
        "scenario": scn.name,
        "params": scn.params.to_dict(),
        "q": spec.position.q,
        "p": spec.position.p,
        "position_residual": spec.position.residual,
        "coefficients": {"A1": spec.poly.A1, "A2": spec.poly.A2, "A3": spec.poly.A3, "A4": spec.poly.A4},
        "n_ladders": len(spec.ladders),
        "n_range": n_range,
        "root_residual": spec.roots.residual,
        "multiplicities": [int(m) for m in spec.roots.multiplicities],
        "re_lines": lines,
        "n_lines": len(lines),
    }, written)


def _write_field(out: Path, stem: str, field: ResponseField, fmt: str, written: list) -> None:
    if fmt == "csv":
        _write(out, f"{stem}.csv", field.to_csv(), written)
    else:
        _write(out, f"{stem}.json", field.to_json() + "\n", written)


def cmd_respond(scn: Scenario, out: Path, fmt: str, figures: bool = True) -> dict:
    cls = classify(scn.params, rationalize_position(scn.params.a, scn.params.L,
                                                    scn.solver.max_denominator))
    field = solve(scn)
    written: list = []
    _write_field(out, "response", field, fmt, written)
    if figures:
        from .plotting import plot_response, plot_snapshots
        _figure(plot_response, written, field, out / "response.png", title=scn.name)
        _figure(plot_snapshots, written, field, out / "snapshots.png", title=scn.name)
    meta = {k: v for k, v in field.meta.items() if k != "energy"}
    energy = field.meta.get("energy") or field.energy(scn.params.c).tolist()
    return _summary(out, {
        "command": "respond",
        "scenario": scn.name,
        "params": scn.params.to_dict(),
        "classification": cls.to_dict(),
        "route": field.meta.get("route"),
        "regime": cls.regime,
        "N": meta.get("N"),
        "max_imag_residual": meta.get("max_imag", 0.0),
        "rigid_term": meta.get("rigid_term_final"),
        "max_abs": float(np.max(np.abs(field.u), initial=0.0)),
        "energy": {"t": field.t.tolist(), "E": list(energy)},
        "meta": meta,
    }, written)


def cmd_compare(scn: Scenario, out: Path, fmt: str, figures: bool = True) -> dict:
    p = scn.params
    written: list = []
    report: dict = {"command": "compare", "scenario": scn.name, "params": p.to_dict()}
    model = assemble(p, scn.solver.n_elements, scn.solver.lumped)
    report["n_elements"] = model.n_elements
    cls = classify(p, rationalize_position(p.a, p.L, scn.solver.max_denominator))
    report["classification"] = cls.to_dict()

    fem_spec = fem_eigenvalues(model)
    floor = 1e-9 * float(np.max(np.abs(fem_spec.values), initial=1.0))
    spec_part: dict = {"fem_max_real": fem_spec.max_real, "fem_stable": fem_spec.max_real <= floor,
                       "condition_M": fem_spec.condition}
    if not cls.is_critical:
        pos = rationalize_position(p.a, p.L, scn.solver.max_denominator)
        spacing = pos.p * math.pi * p.c / p.L
        n_range = int(math.ceil(np.max(np.abs(fem_spec.values.imag)) / spacing)) + 2
        spec = compute_spectrum(p, n_range, scn.solver.max_denominator)
        rep = spurious_report(fem_spec, spec)
        _write(out, "fem_spectrum.csv", rep.to_csv(), written)
        analytic_re = cluster_lines([lad.re_line for lad in spec.ladders])
        spec_part.update(radius=rep.radius, analytic_re_lines=analytic_re,
                         n_unmatched=int(np.sum(~rep.matched)),
                         spurious=[{"re": v.real, "im": v.imag} for v in rep.spurious])
        if figures:
            from .plotting import plot_fem_spectrum
            _figure(plot_fem_spectrum, written, fem_spec.values, out / "fem_spectrum.png",
                    analytic=spec.eigenvalues(), spurious=rep.spurious, title=scn.name)
    else:
        _write(out, "fem_spectrum.csv", spectrum_csv(fem_spec), written)
        spec_part["note"] = "critical parameters: no analytic spectrum to match"
    report["spectrum"] = spec_part

    T = float(scn.grid.t[-1])
    dt, stride = _fem_steps(scn, model.n_elements, T, len(scn.grid.t))
    try:
        fem = fem_time_response(model, scn.initial, scn.forcing, dt, T, save_every=stride)
    except NumericalFailure as exc:
        report["time"] = {"status": "fem_unstable", "message": str(exc), "dt": dt}
        return _summary(out, report, written)
    analytic = solve(scn, Grid(fem.x, fem.t), mode="auto" if scn.solver.mode == "fem" else None)
    diff = analytic.u - fem.u
    scale = float(np.linalg.norm(analytic.u)) or 1.0
    report["time"] = {
        "status": "ok" if spec_part["fem_stable"] else "fem_unstable",
        "route": analytic.meta.get("route"),
        "dt": dt,
        "T": T,
        "max_abs_diff": float(np.max(np.abs(diff), initial=0.0)),
        "rel_l2_diff": float(np.linalg.norm(diff) / scale),
    }
    _write_field(out, "fem_response", fem, fmt, written)
    if figures:
        from .plotting import plot_comparison
        _figure(plot_comparison, written, fem.x, fem.t, analytic.u, fem.u, out / "comparison.png",
                title=scn.name)
    return _summary(out, report, written)


def cmd_classify(scn: Scenario, out: Path, fmt: str, figures: bool = True) -> dict:
    pos = rationalize_position(scn.params.a, scn.params.L, scn.solver.max_denominator)
    cls = classify(scn.params, pos)
    payload = {"command": "classify", "scenario": scn.name, "params": scn.params.to_dict(),
               "q": pos.q, "p": pos.p, **cls.to_dict()}
    return _summary(out, payload, [])


COMMANDS = {"spectrum": cmd_spectrum, "respond": cmd_respond, "compare": cmd_compare,
            "classify": cmd_classify}
HELP = {
    "spectrum": "eigenvalue ladders of the characteristic polynomial",
    "respond": "displacement field u(x, t) on the scenario grid",
    "compare": "analytic response and spectrum against the finite-element model",
    "classify": "critical, rigid and zero-damping flags of the parameters",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barwave",
        description="Spectrum, Green's function and response of a bar with viscous dampers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", default="barwave_out", help="output directory (created if missing)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
        sp.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
        sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scn = load_scenario(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](scn, out, args.format, not args.no_figures)
    except (ConfigError, DomainError, MeshError) as exc:
        print(f"barwave: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnsupportedRegimeError, ExpansionInvalidError, CriticalCoefficientError) as exc:
        print(f"barwave: unsupported regime: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NumericalFailure as exc:
        print(f"barwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "classify":
        print(json.dumps(_jsonable(summary), indent=2))
    else:
        print(f"{args.command}: wrote {', '.join(summary['outputs'])} to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
