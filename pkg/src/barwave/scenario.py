"""Scenario files: JSON documents describing one experiment.

A scenario has the blocks ``params``, ``initial``, ``forcing``, ``grid``
and ``solver``; only ``params`` is mandatory.  Problems are reported as
:class:`~barwave.errors.ConfigError` naming the offending field (and the
line for JSON syntax errors).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigError, DomainError
from .params import Params, make_params
from .response import Forcing, Grid, InitialData, exp_poly_terms, make_grid

SOLVER_MODES = ("auto", "modal", "kernel", "critical", "fem")


@dataclass
class SolverOptions:
    mode: str = "auto"
    N: int = 40
    n_elements: int = 160
    max_denominator: int = 100
    lumped: bool = False
    dt: Optional[float] = None
    n_range: Optional[int] = None


@dataclass
class Scenario:
    name: str
    params: Params
    initial: InitialData
    forcing: Forcing
    grid: Grid
    solver: SolverOptions
    raw: dict = field(default_factory=dict)


def _number(block: dict, key: str, where: str, default: Any = None, positive=False):
    if key not in block:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing required number")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {v!r}")
    return v


def _integer(block: dict, key: str, where: str, default: int, minimum: int = 1) -> int:
    v = block.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{where}.{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _known(block: Any, where: str, allowed) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object, got {type(block).__name__}")
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(extra)}")
    return block


def parse_params(block: Any) -> Params:
    block = _known(block, "params", ("h1", "h2", "h3", "a", "L", "c", "a_over_L"))
    L = _number(block, "L", "params")
    if "a" in block and "a_over_L" in block:
        raise ConfigError("params: give either a or a_over_L, not both")
    if "a" not in block and "a_over_L" not in block:
        raise ConfigError("params.a: missing required number (or give a_over_L)")
    a = block["a"] if "a" in block else _number(block, "a_over_L", "params") * L
    vals = [_number(block, k, "params") for k in ("h1", "h2", "h3")]
    try:
        return make_params(*vals, _number({"a": a}, "a", "params"), L, _number(block, "c", "params"))
    except DomainError as exc:
        raise ConfigError(f"params: {exc}") from exc


def _gaussian_pulses(block: dict, L: float, where: str):
    def pulse(b, w):
        b = _known(b, w, ("amplitude", "mu", "mu_over_L", "sigma"))
        mu = b["mu"] if "mu" in b else _number(b, "mu_over_L", w) * L
        return (_number(b, "amplitude", w, 0.1), _number({"mu": mu}, "mu", w),
                _number(b, "sigma", w, 0.1, positive=True))
    if "pulses" in block:
        if not isinstance(block["pulses"], list) or not block["pulses"]:
            raise ConfigError(f"{where}.pulses: expected a non-empty list")
        return [pulse(b, f"{where}.pulses[{i}]") for i, b in enumerate(block["pulses"])]
    return [pulse({k: v for k, v in block.items() if k != "type"}, where)]


def parse_initial(block: Any, L: float) -> InitialData:
    if block is None:
        return InitialData.zero()
    block = _known(block, "initial", ("type", "amplitude", "mu", "mu_over_L", "sigma", "pulses",
                                      "x", "u", "v"))
    kind = block.get("type", "gaussian")
    if kind == "zero":
        return InitialData.zero()
    if kind in ("gaussian", "gaussians"):
        rest = {k: v for k, v in block.items() if k not in ("x", "u", "v")}
        return InitialData.gaussians(_gaussian_pulses(rest, L, "initial"))
    if kind == "sampled":
        try:
            x = np.asarray(block["x"], float)
            u = np.asarray(block["u"], float)
            v = np.asarray(block["v"], float) if "v" in block else None
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"initial: sampled data needs numeric arrays x, u (and optional v): {exc}")
        if x.ndim != 1 or u.shape != x.shape or (v is not None and v.shape != x.shape):
            raise ConfigError("initial: x, u, v must be 1-D arrays of equal length")
        if len(x) < 2 or np.any(np.diff(x) <= 0) or x[0] > 0 or x[-1] < L:
            raise ConfigError("initial.x: must increase strictly and cover [0, L]")
        return InitialData.sampled(x, u, v)
    raise ConfigError(f"initial.type: unknown kind {kind!r} (zero | gaussian | sampled)")


def _spatial(block: Any, L: float):
    block = _known(block, "forcing.space", ("type", "amplitude", "center", "width", "value"))
    kind = block.get("type", "constant")
    if kind == "constant":
        value = _number(block, "value", "forcing.space", 1.0)
        return (lambda x: np.full(np.shape(x), float(value))), ()
    if kind == "gaussian":
        amp = _number(block, "amplitude", "forcing.space", 1.0)
        mu = _number(block, "center", "forcing.space")
        w = _number(block, "width", "forcing.space", positive=True)
        return (lambda x: amp * np.exp(-(np.asarray(x) - mu) ** 2 / (2 * w ** 2))), ()
    raise ConfigError(f"forcing.space.type: unknown kind {kind!r} (constant | gaussian)")


def parse_forcing(block: Any, L: float) -> Forcing:
    if block is None:
        return Forcing.none()
    block = _known(block, "forcing", ("type", "space", "time"))
    kind = block.get("type", "none")
    if kind == "none":
        return Forcing.none()
    if kind != "separable":
        raise ConfigError(f"forcing.type: unknown kind {kind!r} (none | separable)")
    f, breaks = _spatial(block.get("space", {}), L)
    tb = _known(block.get("time", {"type": "constant"}), "forcing.time",
                ("type", "value", "amplitude", "rate", "omega", "phase", "coef", "power"))
    kw = {k: v for k, v in tb.items() if k != "type"}
    try:
        terms = exp_poly_terms(tb.get("type", "constant"), **kw)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"forcing.time: {exc}") from exc
    return Forcing.separable(f, g_terms=terms, breakpoints=breaks)


def parse_grid(block: Any, params: Params) -> Grid:
    block = _known(block or {}, "grid", ("nx", "nt", "T"))
    nx = _integer(block, "nx", "grid", 201, 2)
    nt = _integer(block, "nt", "grid", 401, 2)
    T = _number(block, "T", "grid", 2 * params.L / params.c, positive=True)
    return make_grid(params, nx, nt, T)


def parse_solver(block: Any) -> SolverOptions:
    block = _known(block or {}, "solver", ("mode", "N", "n_elements", "max_denominator", "lumped",
                                           "dt", "n_range"))
    mode = block.get("mode", "auto")
    if mode not in SOLVER_MODES:
        raise ConfigError(f"solver.mode: expected one of {', '.join(SOLVER_MODES)}, got {mode!r}")
    lumped = block.get("lumped", False)
    if not isinstance(lumped, bool):
        raise ConfigError("solver.lumped: expected true or false")
    dt = _number(block, "dt", "solver", positive=True) if "dt" in block else None
    n_range = _integer(block, "n_range", "solver", 40, 0) if "n_range" in block else None
    return SolverOptions(mode, _integer(block, "N", "solver", 40, 0),
                         _integer(block, "n_elements", "solver", 160, 4),
                         _integer(block, "max_denominator", "solver", 100, 1), lumped, dt, n_range)


def scenario_from_dict(data: Any, name: str = "scenario") -> Scenario:
    data = _known(data, "scenario", ("name", "description", "params", "initial", "forcing", "grid",
                                     "solver"))
    if "params" not in data:
        raise ConfigError("scenario: missing params block")
    params = parse_params(data["params"])
    return Scenario(
        name=str(data.get("name", name)),
        params=params,
        initial=parse_initial(data.get("initial"), params.L),
        forcing=parse_forcing(data.get("forcing"), params.L),
        grid=parse_grid(data.get("grid"), params),
        solver=parse_solver(data.get("solver")),
        raw=data,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(data, path.stem)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
