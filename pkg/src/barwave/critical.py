"""Closed-form kernels and responses for transparent boundaries.

When a boundary damper is matched to the bar impedance (``h = 1``) the
spectrum disappears and the kernel becomes a finite sum of step functions
``w(x, xi) H(ct - d(x, xi))``.  :class:`WaveKernel` stores such sums and
integrates them against data exactly: the time derivative of a step is a
delta that picks out the data at the wavefront, and the force convolution
reduces to the time-integrated force evaluated at a delayed time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DomainError, SuperInstabilityError, UnsupportedRegimeError
from .green import same_side
from .modes import heaviside
from .params import CRITICAL_TOL, Params, classify
from .quadrature import gauss_panels, parallel_map
from .response import Forcing, Grid, InitialData, ResponseField, respond_kernel

# wavefront distance d(x, xi) for each kind of step term
_DISTANCES = {
    "direct": lambda x, xi, p: np.abs(x - xi),
    "left": lambda x, xi, p: x + xi,
    "right": lambda x, xi, p: 2 * p.L - x - xi,
    "internal": lambda x, xi, p: np.abs(x + xi - 2 * p.a),
}


def _front_positions(kind: str, x: float, ct: float, p: Params) -> Tuple[float, ...]:
    """Source points ``xi`` whose wavefront reaches ``x`` exactly at time ``t``."""
    return tuple(xs for xs, _ in _fronts(kind, x, ct, p))


def _snap(xs: float, p: Params) -> float:
    """Move a front lying within rounding of ``0``, ``a`` or ``L`` onto that point."""
    tol = 8 * np.finfo(float).eps * p.L
    for mark in (0.0, p.a, p.L):
        if abs(xs - mark) <= tol:
            return mark
    return xs


def _fronts(kind: str, x: float, ct: float, p: Params) -> Tuple[Tuple[float, int], ...]:
    """Front positions with the sign of their motion in ``xi`` as ``t`` grows."""
    if kind == "direct":
        out = ((x - ct, -1), (x + ct, 1))
    elif kind == "left":
        out = ((ct - x, 1),)
    elif kind == "right":
        out = ((2 * p.L - x - ct, -1),)
    else:
        out = ((2 * p.a - x - ct, -1), (2 * p.a - x + ct, 1))
    return tuple((_snap(xs, p), d) for xs, d in out)


def _inside(xs: float, direction: int, L: float) -> bool:
    """Right-continuous membership of a moving front in ``[0, L]``.

    A front sitting on an end counts only when it is moving inwards, so
    that every time sample (``t = 0`` included) sees the limit from later
    times.
    """
    if 0.0 < xs < L:
        return True
    return (xs == 0.0 and direction > 0) or (xs == L and direction < 0)


def _step(arg, p: Params):
    """``H(arg)`` with arguments within rounding of zero counted as reached."""
    arg = np.asarray(arg, float)
    return heaviside(np.where(np.abs(arg) <= 8 * np.finfo(float).eps * p.L, 0.0, arg))


@dataclass
class StepTerm:
    kind: str
    weight: Callable  # weight(x, xi) -> array


class WaveKernel:
    """Kernel ``Gamma = sum_j w_j(x, xi) H(ct - d_j(x, xi))``."""

    static_breaks = False
    panels = 4

    def __init__(self, params: Params, terms: List[StepTerm], regime: str):
        self.params = params
        self.terms = terms
        self.regime = regime

    def gamma(self, x, xi, t):
        """Matrix ``Gamma(x, xi_i, t_j)``; also broadcasts for scalar inputs."""
        xi = np.atleast_1d(np.asarray(xi, float))[:, None]
        t = np.atleast_1d(np.asarray(t, float))[None, :]
        p = self.params
        out = np.zeros(np.broadcast(xi, t).shape)
        for term in self.terms:
            d = _DISTANCES[term.kind](x, xi, p)
            out = out + term.weight(x, xi) * _step(p.c * t - d, p)
        return out

    def value(self, x, xi, t):
        """Pointwise ``Gamma`` with full broadcasting over ``x``, ``xi``, ``t``."""
        p = self.params
        x, xi, t = np.broadcast_arrays(*(np.asarray(v, float) for v in (x, xi, t)))
        out = np.zeros(x.shape)
        for term in self.terms:
            out = out + term.weight(x, xi) * _step(p.c * t - _DISTANCES[term.kind](x, xi, p), p)
        return out

    def breakpoints(self, x, t):
        """Points in ``xi`` where the kernel jumps at time ``t``."""
        p = self.params
        ct = p.c * t
        pts = {p.a, x}
        for term in self.terms:
            pts.update(_front_positions(term.kind, x, ct, p))
        return tuple(sorted(v for v in pts if 0.0 < v < p.L))

    def atoms(self, x, t):
        """Delta contributions of ``Gamma_t``: pairs ``(xi*, c * w(x, xi*))``.

        A front sitting exactly on the damper reads its weight just past
        ``a`` in its direction of motion, the value it has right after.
        """
        p = self.params
        out = []
        for term in self.terms:
            for xs, direction in _fronts(term.kind, x, p.c * t, p):
                if _inside(xs, direction, p.L):
                    probe = xs
                    if xs == p.a:
                        probe = np.nextafter(xs, math.inf if direction > 0 else -math.inf)
                    out.append((xs, p.c * float(term.weight(x, probe))))
        return out

    def force_term(self, x, t, forcing: Forcing, nodes, weights) -> float:
        """``int int Gamma(x, xi, t - tau) p(xi, tau)`` via the time-integrated force."""
        p = self.params
        total = np.zeros(len(nodes))
        for term in self.terms:
            delay = _DISTANCES[term.kind](x, nodes, p) / p.c
            total += term.weight(x, nodes) * forcing.cumulative(nodes, t - delay)
        return float(weights @ total)


def _check(params: Params, need: dict, label: str):
    for name, target in need.items():
        if abs(getattr(params, name) - target) > CRITICAL_TOL:
            raise DomainError(f"{label} requires {name}={target:g}, got {getattr(params, name)}")


def right_transparent_kernel(params: Params) -> WaveKernel:
    """Kernel for ``h2 = 1``, ``h3 = 0``: direct wave plus one left-end reflection."""
    _check(params, {"h2": 1.0, "h3": 0.0}, "right-transparent kernel")
    if abs(params.h1 + 1) < CRITICAL_TOL:
        raise SuperInstabilityError("h1 = -1: reflection at the left end is unbounded")
    c, r = params.c, (1 - params.h1) / (1 + params.h1)
    return WaveKernel(params, [
        StepTerm("direct", lambda x, xi: np.full(np.broadcast(x, xi).shape, c / 2)),
        StepTerm("left", lambda x, xi: np.full(np.broadcast(x, xi).shape, c * r / 2)),
    ], "right_transparent")


def left_transparent_kernel(params: Params) -> WaveKernel:
    """Mirror image of :func:`right_transparent_kernel` (``h1 = 1``, ``h3 = 0``)."""
    _check(params, {"h1": 1.0, "h3": 0.0}, "left-transparent kernel")
    if abs(params.h2 + 1) < CRITICAL_TOL:
        raise SuperInstabilityError("h2 = -1: reflection at the right end is unbounded")
    c, r = params.c, (1 - params.h2) / (1 + params.h2)
    return WaveKernel(params, [
        StepTerm("direct", lambda x, xi: np.full(np.broadcast(x, xi).shape, c / 2)),
        StepTerm("right", lambda x, xi: np.full(np.broadcast(x, xi).shape, c * r / 2)),
    ], "left_transparent")


def both_transparent_kernel(params: Params) -> WaveKernel:
    """Kernel for ``h1 = h2 = 1``: transmission and reflection at the internal damper."""
    _check(params, {"h1": 1.0, "h2": 1.0}, "both-transparent kernel")
    h3, c, a = params.h3, params.c, params.a
    if abs(h3 + 1) < CRITICAL_TOL:
        raise SuperInstabilityError("h3 = -1: reflection at the internal damper is unbounded")
    k = c / (2 * (1 + h3))
    return WaveKernel(params, [
        StepTerm("direct", lambda x, xi: k * (1 + h3 * same_side(x, xi, a))),
        StepTerm("internal", lambda x, xi: -k * h3 * same_side(x, xi, a)),
    ], "both_transparent")


def gamma_right_transparent(x, xi, t, params: Params):
    """``(c/2)[H(ct - |x-xi|) + (1-h1)/(1+h1) H(ct - (x+xi))]``."""
    return right_transparent_kernel(params).value(x, xi, t)


def gamma_both_transparent(x, xi, t, params: Params):
    """``c/(2(1+h3)) [H(ct-|x-xi|) + h3 H_a (H(ct-|x-xi|) - H(ct-|x+xi-2a|))]``."""
    return both_transparent_kernel(params).value(x, xi, t)


def kernel_for(params: Params) -> WaveKernel:
    """Closed-form kernel for the regime of ``params``.

    Raises
    ------
    SuperInstabilityError
        Some ``h_i = -1``.
    UnsupportedRegimeError
        Partially transparent with an internal damper, or an internal damper
        with ``h3 = +1`` and reflecting ends: no closed form exists.
    """
    regime = classify(params).regime
    if regime == "super_unstable":
        raise SuperInstabilityError(
            "some h_i = -1: a wave reaching that damper would require unbounded energy "
            "transfer, so the solution stops existing in finite time")
    if regime == "both_transparent":
        return both_transparent_kernel(params)
    if regime == "right_transparent":
        return right_transparent_kernel(params)
    if regime == "left_transparent":
        return left_transparent_kernel(params)
    if regime == "modal":
        raise UnsupportedRegimeError("parameters are not critical; use the modal expansion")
    raise UnsupportedRegimeError(
        "one end transparent with an internal damper (or h3 = +1 alone): standing waves "
        "form on part of the bar and no closed-form kernel is available")


def respond_critical(params: Params, initial: InitialData, forcing: Optional[Forcing],
                     grid: Grid) -> ResponseField:
    """Kernel-route response with the closed-form kernel of the current regime."""
    kernel = kernel_for(params)
    field = respond_kernel(kernel, initial, forcing, params, grid)
    field.meta.update(route="critical", regime=kernel.regime)
    return field


def respond_right_transparent(initial: InitialData, forcing: Optional[Forcing], params: Params,
                              grid: Grid) -> ResponseField:
    kernel = right_transparent_kernel(params)
    field = respond_kernel(kernel, initial, forcing, params, grid)
    field.meta.update(route="critical", regime=kernel.regime)
    return field


# -- explicit integrals for h1 = h2 = 1 ------------------------------------------

def _extend(fn: Callable, L: float) -> Callable:
    """Zero extension of ``fn`` outside ``[0, L]``."""
    def ext(y):
        y = np.asarray(y, float)
        inside = (y >= 0) & (y <= L)
        return np.where(inside, fn(np.clip(y, 0.0, L)), 0.0)
    return ext


def _tau_integral(g: Callable, base: float, sign: float, t: float, on: Tuple[float, float],
                  c: float, L: float, breaks=(), order: int = 16, panels: int = 4) -> float:
    """``int g(base + sign*c*tau) d tau`` over ``tau`` in ``[0, t]`` intersected with ``on``."""
    lo, hi = max(0.0, on[0]), min(t, on[1])
    if hi <= lo:
        return 0.0
    # the argument crosses 0, L and data breakpoints at these times
    cuts = [(v - base) * sign / c for v in (0.0, L) + tuple(breaks)]
    nodes, w = gauss_panels(lo, hi, cuts, panels, order)
    return float(w @ g(base + sign * c * nodes))


def respond_both_transparent(initial: InitialData, forcing: Optional[Forcing], params: Params,
                             grid: Grid, order: int = 16, panels: int = 4) -> ResponseField:
    """Response for ``h1 = h2 = 1`` from the explicit wavefront integrals.

    The displacement term reads the data at the wavefronts, the velocity
    term is a time integral along the characteristics through ``x`` and
    the force term integrates the time-integrated force over four source
    regions.  Equivalent to :func:`respond_kernel` fed with
    :func:`both_transparent_kernel`.
    """
    kernel = both_transparent_kernel(params)
    forcing = forcing or Forcing.none()
    c, h3, L, a = params.c, params.h3, params.L, params.a
    x = np.asarray(grid.x, float)
    t = np.asarray(grid.t, float)
    g = _extend(initial.velocity, L)
    u0b = initial.displacement(np.array([0.0, L, a]))
    r = h3 / (2 * (1 + h3))  # reflected fraction
    tr = 1 / (2 * (1 + h3))  # transmitted fraction
    breaks = tuple(initial.breakpoints) + tuple(forcing.breakpoints)

    def front(y, direction):
        y = _snap(y, params)
        return float(initial.displacement(np.array(y))) if _inside(y, direction, L) else 0.0

    def disp(xj, tk):
        # "after" once the front through x has reached the damper, judged in
        # space like the kernel route so both round the same way
        ct = c * tk
        if xj <= a:
            after = _snap(xj + ct, params) >= a
            return (-r * front(2 * a - xj - ct, -1) * after + 0.5 * front(xj - ct, -1)
                    + 0.5 * front(xj + ct, 1) * (not after) + tr * front(xj + ct, 1) * after)
        after = _snap(xj - ct, params) <= a
        return (-r * front(2 * a - xj + ct, 1) * after + 0.5 * front(xj + ct, 1)
                + 0.5 * front(xj - ct, -1) * (not after) + tr * front(xj - ct, -1) * after)

    def vel(xj, tk):
        q = lambda base, sign, on: _tau_integral(g, base, sign, tk, on, c, L, breaks, order, panels)
        inf = math.inf
        if xj <= a:
            s = (a - xj) / c
            return (-r * q(2 * a - xj, -1, (s, inf)) + 0.5 * q(xj, -1, (0, inf))
                    + 0.5 * q(xj, 1, (0, s)) + tr * q(xj, 1, (s, inf)))
        s = (xj - a) / c
        return (-r * q(2 * a - xj, 1, (s, inf)) + 0.5 * q(xj, 1, (0, inf))
                + 0.5 * q(xj, -1, (0, s)) + tr * q(xj, -1, (s, inf)))

    def region(lo, hi, delay, xj, tk):
        if hi <= lo:
            return 0.0
        cuts = (xj - c * tk, xj + c * tk, c * tk - xj, 2 * a - xj - c * tk, 2 * a - xj + c * tk) + breaks
        nodes, w = gauss_panels(lo, hi, cuts, panels, order)
        return float(w @ forcing.cumulative(nodes, tk - delay(nodes) / c))

    def force(xj, tk):
        if forcing.is_zero or tk <= 0:
            return 0.0
        direct = lambda xi: np.abs(xj - xi)
        refl = lambda xi: np.abs(xj + xi - 2 * a)
        if xj <= a:
            total = (-h3 * region(0, a, refl, xj, tk)
                     + (1 + h3) * region(0, xj, direct, xj, tk)
                     + (1 + h3) * region(xj, a, direct, xj, tk)
                     + region(a, L, direct, xj, tk))
        else:
            total = (region(0, a, direct, xj, tk)
                     - h3 * region(a, L, refl, xj, tk)
                     + (1 + h3) * region(a, xj, direct, xj, tk)
                     + (1 + h3) * region(xj, L, direct, xj, tk))
        return total / (2 * c * (1 + h3))

    def column(xj):
        col = np.zeros(len(t))
        for b, hb, ub in ((0.0, 1.0, u0b[0]), (L, 1.0, u0b[1]), (a, 2 * h3, u0b[2])):
            if hb * ub != 0:
                col += hb * ub / c * kernel.gamma(xj, [b], t)[0]
        for k, tk in enumerate(t):
            col[k] += float(disp(xj, tk)) + vel(xj, tk) + force(xj, tk)
        return col

    u = np.array(parallel_map(column, list(x))).T
    return ResponseField(x, t, u, {"route": "critical", "regime": "both_transparent",
                                   "method": "explicit",
                                   "max_abs": float(np.max(np.abs(u), initial=0.0))})
