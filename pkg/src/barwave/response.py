"""Time-domain response of the bar to initial data and distributed forcing.

Two routes are provided.  :func:`respond_modal` sums the eigenmode series
with every spatial integral taken mode by mode.  :func:`respond_kernel`
works from any time-domain kernel ``Gamma(x, xi, t)`` (modal or closed
form) and integrates the kernel against the data point by point.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .green import GreenExpansion
from .params import Params
from .quadrature import adaptive_rule, gauss_panels, parallel_map


def _zero(x, *args):
    return np.zeros_like(np.asarray(x, float))


# -- data ------------------------------------------------------------------------

@dataclass
class InitialData:
    """Initial displacement ``u0(x)`` and velocity ``v0(x)`` on ``[0, L]``."""

    u0: Callable = _zero
    v0: Callable = _zero
    breakpoints: Tuple[float, ...] = ()
    zero_u: bool = False
    zero_v: bool = False

    @classmethod
    def zero(cls) -> "InitialData":
        return cls(zero_u=True, zero_v=True)

    @classmethod
    def gaussian(cls, amplitude: float, mu: float, sigma: float) -> "InitialData":
        """Displacement ``amplitude * N(mu, sigma)`` (unit-mass Gaussian pulse), zero velocity."""
        return cls.gaussians([(amplitude, mu, sigma)])

    @classmethod
    def gaussians(cls, pulses: Sequence[Tuple[float, float, float]],
                  velocity: Optional[Callable] = None) -> "InitialData":
        pulses = [tuple(map(float, p)) for p in pulses]

        def u0(x):
            x = np.asarray(x, float)
            out = np.zeros_like(x)
            for amp, mu, sig in pulses:
                out = out + amp * np.exp(-(x - mu) ** 2 / (2 * sig ** 2)) / (sig * math.sqrt(2 * math.pi))
            return out

        if velocity is None:
            return cls(u0=u0, zero_v=True)
        return cls(u0=u0, v0=velocity)

    @classmethod
    def sampled(cls, x, u, v=None) -> "InitialData":
        """Piecewise-linear data through tabulated samples."""
        x = np.asarray(x, float)
        u = np.asarray(u, float)
        vv = np.zeros_like(u) if v is None else np.asarray(v, float)
        return cls(u0=lambda y: np.interp(y, x, u), v0=lambda y: np.interp(y, x, vv),
                   breakpoints=tuple(x), zero_v=v is None)

    def displacement(self, x):
        return _zero(x) if self.zero_u else np.asarray(self.u0(x), float) + _zero(x)

    def velocity(self, x):
        return _zero(x) if self.zero_v else np.asarray(self.v0(x), float) + _zero(x)


def exp_poly_terms(kind: str, **kw) -> Tuple[Tuple[complex, int, complex], ...]:
    """Time profile as ``sum coef * t**power * exp(rate * t)`` terms.

    ``kind`` is ``constant`` (``value``), ``exponential`` (``amplitude``,
    ``rate``), ``sinusoid`` (``amplitude``, ``omega``, ``phase``) or
    ``polyexp`` (``coef``, ``power``, ``rate``).
    """
    if kind == "constant":
        return ((complex(kw.get("value", 1.0)), 0, 0j),)
    if kind == "exponential":
        return ((complex(kw.get("amplitude", 1.0)), 0, complex(kw["rate"])),)
    if kind == "sinusoid":
        amp, om, ph = kw.get("amplitude", 1.0), kw["omega"], kw.get("phase", 0.0)
        # amp*sin(om t + ph) written with two complex exponentials
        return ((amp * np.exp(1j * ph) / 2j, 0, 1j * om), (-amp * np.exp(-1j * ph) / 2j, 0, -1j * om))
    if kind == "polyexp":
        return ((complex(kw.get("coef", 1.0)), int(kw["power"]), complex(kw.get("rate", 0.0))),)
    raise ValueError(f"unknown time profile {kind!r}")


@dataclass
class Forcing:
    """External force per unit mass ``p(x, t)``.

    Either general (``p``) or separable ``f(x) g(t)``; a separable time
    profile given as exponential-polynomial ``g_terms`` is integrated in
    closed form, a callable ``g`` by quadrature.
    """

    p: Optional[Callable] = None
    f: Optional[Callable] = None
    g: Optional[Callable] = None
    g_terms: Tuple[Tuple[complex, int, complex], ...] = ()
    breakpoints: Tuple[float, ...] = ()

    @classmethod
    def none(cls) -> "Forcing":
        return cls()

    @classmethod
    def separable(cls, f: Callable, g: Optional[Callable] = None, g_terms=(), breakpoints=()):
        return cls(f=f, g=g, g_terms=tuple(g_terms), breakpoints=tuple(breakpoints))

    @property
    def is_zero(self) -> bool:
        return self.p is None and self.f is None

    @property
    def closed_form(self) -> bool:
        return self.p is None and self.f is not None and self.g is None and bool(self.g_terms)

    def time_profile(self, t):
        t = np.asarray(t, float)
        if self.g is not None:
            return np.asarray(self.g(t), float) + 0 * t
        out = np.zeros(t.shape, complex)
        for coef, m, lam in self.g_terms:
            out = out + coef * t ** m * np.exp(lam * t)
        return out.real

    def value(self, x, t):
        if self.p is not None:
            return np.asarray(self.p(x, t), float)
        if self.f is None:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)
        return np.asarray(self.f(x), float) * self.time_profile(t)

    def cumulative(self, x, T):
        """``int_0^T p(x, tau) d tau`` (zero for ``T <= 0``), broadcast over ``x`` and ``T``."""
        x = np.asarray(x, float)
        T = np.maximum(np.asarray(T, float), 0.0)
        if self.is_zero:
            return np.zeros(np.broadcast(x, T).shape)
        if self.closed_form:
            tot = np.zeros(T.shape, complex)
            for coef, m, lam in self.g_terms:
                tot = tot + coef * expoly_convolution(m, lam, 0.0, T)
            return np.asarray(self.f(x), float) * tot.real
        g, w = np.polynomial.legendre.leggauss(24)
        tau = 0.5 * T[..., None] * (g + 1)
        vals = self.value(x[..., None], tau)
        return 0.5 * T * np.sum(vals * w, axis=-1)


def expoly_convolution(m: int, lam: complex, s, t):
    """``int_0^t tau**m exp(lam tau) exp(s (t - tau)) d tau`` in closed form.

    Broadcasts over ``s`` and ``t``.  A power series is used where
    ``|lam - s| t`` is small, an upward recursion elsewhere.
    """
    s = np.asarray(s, complex)
    t = np.asarray(t, float)
    s, t = np.broadcast_arrays(s, t)
    beta = lam - s
    z = beta * t
    small = np.abs(z) < 0.5
    out = np.zeros(s.shape, complex)
    if np.any(small):
        ts, bs, ss = t[small], beta[small], s[small]
        term = ts ** (m + 1) / (m + 1) + 0j
        acc = term.copy()
        fact = 1.0
        for j in range(1, 30):
            fact *= j
            acc = acc + bs ** j * ts ** (m + j + 1) / (fact * (m + j + 1))
        out[small] = np.exp(ss * ts) * acc
    big = ~small
    if np.any(big):
        tb, bb, sb = t[big], beta[big], s[big]
        k = (np.exp(lam * tb) - np.exp(sb * tb)) / bb
        for j in range(1, m + 1):
            k = (tb ** j * np.exp(lam * tb) - j * k) / bb
        out[big] = k
    return out


# -- grid and output -------------------------------------------------------------

@dataclass
class Grid:
    x: np.ndarray
    t: np.ndarray


def make_grid(params: Params, nx: int = 201, nt: int = 401, T: Optional[float] = None) -> Grid:
    T = 2 * params.L / params.c if T is None else T
    return Grid(np.linspace(0.0, params.L, nx), np.linspace(0.0, T, nt))


@dataclass
class ResponseField:
    """Sampled ``u(x, t)``; ``u[i, j]`` is the displacement at ``t[i]``, ``x[j]``."""

    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [repr(float(v)) for v in self.x])
        for ti, row in zip(self.t, self.u):
            w.writerow([repr(float(ti))] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"x": self.x.tolist(), "t": self.t.tolist(), "u": self.u.tolist(),
                           "meta": self.meta})

    @classmethod
    def from_csv(cls, text: str) -> "ResponseField":
        rows = list(csv.reader(io.StringIO(text)))
        x = np.array([float(v) for v in rows[0][1:]])
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(x, data[:, 0], data[:, 1:])

    def energy(self, c: float) -> np.ndarray:
        """Discrete energy ``1/2 int (u_t^2 + c^2 u_x^2) dx`` per time sample."""
        ut = np.gradient(self.u, self.t, axis=0)
        ux = np.gradient(self.u, self.x, axis=1)
        return 0.5 * trapezoid(ut ** 2 + c ** 2 * ux ** 2, x=self.x, axis=1)


# -- time convolutions --------------------------------------------------------------

def _convolve(project: Callable, s: np.ndarray, t: np.ndarray, ramp: bool = False,
              order: int = 12) -> np.ndarray:
    """``int_0^{t_j} Q(tau) k(t_j - tau) d tau`` for every grid time.

    ``project(tau)`` returns ``Q`` with shape ``(K, len(tau))``; the kernel is
    ``exp(s (t - tau))`` per row, or ``t - tau`` when ``ramp`` is set.
    Accumulates interval by interval, so ``t`` must be increasing.
    """
    g, w = np.polynomial.legendre.leggauss(order)
    s = np.asarray(s, complex)
    smax = float(np.max(np.abs(s), initial=0.0))
    out = np.zeros((len(s), len(t)), complex)
    acc = np.zeros(len(s), complex)
    mass = np.zeros(len(s), complex)  # running int Q, needed for the ramp kernel
    prev = 0.0
    for j, tj in enumerate(t):
        dt = tj - prev
        if dt > 0:
            sub = max(1, int(math.ceil(smax * dt / 2.0)))
            edges = np.linspace(prev, tj, sub + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * (edges[1] - edges[0])
            tau = (mid[:, None] + half * g[None, :]).ravel()
            wt = np.tile(half * w, sub)
            Q = project(tau)
            if ramp:
                acc = acc + dt * mass + Q @ (wt * (tj - tau))
                mass = mass + Q @ wt
            else:
                acc = np.exp(s * dt) * acc + (Q * np.exp(np.outer(s, tj - tau))) @ wt
        out[:, j] = acc
        prev = tj
    return out


def _force_projection(forcing: Forcing, nodes, weights, rows: np.ndarray):
    """Return ``project(tau)`` computing ``rows @ (weights * p(nodes, tau))``."""
    if forcing.p is None:
        spatial = rows @ (weights * np.asarray(forcing.f(nodes), float))
        return lambda tau: np.outer(spatial, forcing.time_profile(tau))
    return lambda tau: rows @ (weights[:, None] * forcing.value(nodes[:, None], tau[None, :]))


def _force_series(forcing: Forcing, nodes, weights, rows, s, t) -> np.ndarray:
    """Duhamel integrals ``int_0^t e^{s (t - tau)} int p rows d xi d tau`` of shape (K, nt)."""
    if forcing.closed_form:
        spatial = rows @ (weights * np.asarray(forcing.f(nodes), float))
        tot = np.zeros((len(s), len(t)), complex)
        for coef, m, lam in forcing.g_terms:
            tot = tot + coef * expoly_convolution(m, lam, s[:, None], t[None, :])
        return spatial[:, None] * tot
    return _convolve(_force_projection(forcing, nodes, weights, rows), s, t)


def _force_ramp(forcing: Forcing, nodes, weights, rows, t) -> np.ndarray:
    """``int_0^t (t - tau) int p rows d xi d tau``, shape (K, nt)."""
    if forcing.closed_form:
        spatial = rows @ (weights * np.asarray(forcing.f(nodes), float))
        tot = np.zeros(len(t), complex)
        for coef, m, lam in forcing.g_terms:
            tot = tot + coef * (t * expoly_convolution(m, lam, 0.0, t)
                                - expoly_convolution(m + 1, lam, 0.0, t))
        return spatial[:, None] * tot[None, :]
    return _convolve(_force_projection(forcing, nodes, weights, rows),
                     np.zeros(rows.shape[0]), t, ramp=True)


def _with_origin(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, float)
    if np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("time grid must be non-negative and increasing")
    return t


# -- modal route ------------------------------------------------------------------

def _xi_rule(expansion: GreenExpansion, initial: InitialData, forcing: Forcing, rtol=1e-12):
    p = expansion.params
    breaks = (p.a,) + tuple(initial.breakpoints) + tuple(forcing.breakpoints)
    basis = expansion.basis
    s = expansion.s

    def integrand(xi):
        modes = basis.phi_a(xi[None, :], s[:, None])
        data = initial.displacement(xi) + initial.velocity(xi)
        if forcing.f is not None:
            data = data + np.asarray(forcing.f(xi), float)
        return modes * data[None, :]

    return adaptive_rule(integrand, 0.0, p.L, breaks, rtol=rtol)


def _principal_response(expansion: GreenExpansion, initial: InitialData, forcing: Forcing,
                        x: np.ndarray, t: np.ndarray, nodes, weights) -> np.ndarray:
    """Contribution of the pole at ``s = 0`` (rigid motion), shape (nt, nx)."""
    p = expansion.params
    pp = expansion.principal
    c, h1, h2, h3, L, a = p.c, p.h1, p.h2, p.h3, p.L, p.a
    u0 = initial.displacement(np.array([0.0, L, a]))
    out = np.zeros((len(t), len(x)))
    for b, hb, ub in ((0.0, h1, u0[0]), (L, h2, u0[1]), (a, 2 * h3, u0[2])):
        if hb * ub != 0:
            out += hb * ub / c * pp.gamma(x[None, :], b, t[:, None])
    c1 = pp.c1(x[:, None], nodes[None, :])  # (nx, nq)
    if pp.kind == "double":
        out += pp.c2 / c ** 2 * float(weights @ initial.displacement(nodes))
    if not initial.zero_v:
        v = weights * initial.velocity(nodes)
        out += (c1 @ v)[None, :] / c ** 2
        if pp.kind == "double":
            out += pp.c2 * t[:, None] * v.sum() / c ** 2
    if not forcing.is_zero:
        rows = np.vstack([c1, np.ones((1, len(nodes)))])
        m0 = _force_series(forcing, nodes, weights, rows, np.zeros(len(rows)), t).real
        out += m0[:-1].T / c ** 2
        if pp.kind == "double":
            m1 = _force_ramp(forcing, nodes, weights, rows[-1:], t).real
            out += pp.c2 * m1[0][:, None] / c ** 2
    return out


def respond_modal(expansion: GreenExpansion, initial: InitialData, forcing: Optional[Forcing],
                  grid: Grid) -> ResponseField:
    """Vibratory response from the eigenmode series.

    Each retained eigenvalue contributes
    ``phi_a(x, s_n) / (c^2 A_n) * (e^{s_n t} B_n + D_n(t))`` where ``B_n``
    collects the boundary, damper and initial-data projections and ``D_n``
    is the Duhamel integral of the projected force; the pole at zero adds
    the rigid-body part.
    """
    forcing = forcing or Forcing.none()
    p = expansion.params
    c, h1, h2, h3, L, a = p.c, p.h1, p.h2, p.h3, p.L, p.a
    x = np.asarray(grid.x, float)
    t = _with_origin(grid.t)
    basis = expansion.basis
    s, A = expansion.s, expansion.A

    nodes, weights = _xi_rule(expansion, initial, forcing)
    modes_q = basis.phi_a(nodes[None, :], s[:, None])
    u0q = initial.displacement(nodes)
    v0q = initial.velocity(nodes)
    u0b = initial.displacement(np.array([0.0, L, a]))
    B = (c * h1 * u0b[0]
         + c * h2 * u0b[1] * basis.phi_a(L, s)
         + 2 * c * h3 * u0b[2] * basis.phi_a(a, s)
         + s * (modes_q @ (weights * u0q)) + modes_q @ (weights * v0q))

    coef = np.exp(np.outer(s, t)) * B[:, None]
    if not forcing.is_zero:
        coef = coef + _force_series(forcing, nodes, weights, modes_q, s, t)
    coef = coef / (c ** 2 * A[:, None])

    modes_x = basis.phi_a(x[None, :], s[:, None])  # (K, nx)

    def chunk(idx):
        return coef[:, idx].T @ modes_x

    chunks = np.array_split(np.arange(len(t)), max(1, min(len(t), 8)))
    series = np.vstack(parallel_map(chunk, [c_ for c_ in chunks if len(c_)]))
    principal = _principal_response(expansion, initial, forcing, x, t, nodes, weights)
    u = principal + series.real
    peak = float(np.max(np.abs(u), initial=0.0))
    meta = {
        "route": "modal",
        "N": int(expansion.N),
        "n_terms": int(len(s)),
        "max_imag": float(np.max(np.abs(series.imag), initial=0.0)),
        "max_abs": peak,
        "principal": expansion.principal.kind,
        "rigid_term_final": float(np.mean(principal[-1])) if len(t) else 0.0,
    }
    return ResponseField(x, t, u, meta)


# -- kernel route ------------------------------------------------------------------

class ModalKernel:
    """``Gamma`` and ``Gamma_t`` evaluated pointwise from a truncated expansion.

    The spatial breakpoints do not move with ``t`` (``static_breaks``), so the
    kernel route can evaluate all sample times at once.
    """

    static_breaks = True

    def __init__(self, expansion: GreenExpansion):
        self.expansion = expansion
        self.params = expansion.params
        self._basis = expansion.basis
        self.rate = float(np.max(np.abs(expansion.s), initial=1.0))
        # enough panels per piece to resolve the fastest retained mode
        self.panels = max(4, int(math.ceil(self.rate * self.params.L / (self.params.c * 4.0))))

    def _series(self, x, xi, t, derivative=False):
        e = self.expansion
        px = self._basis.phi_a(x, e.s) / e.A
        if derivative:
            px = px * e.s
        pxi = self._basis.phi_a(np.asarray(xi, float)[:, None], e.s[None, :])
        return ((pxi * px[None, :]) @ np.exp(np.outer(e.s, np.atleast_1d(t)))).real

    def gamma(self, x, xi, t):
        """Matrix ``Gamma(x, xi_i, t_j)``."""
        xi = np.atleast_1d(np.asarray(xi, float))
        t = np.atleast_1d(np.asarray(t, float))
        return self.expansion.principal.gamma(x, xi[:, None], t[None, :]) + self._series(x, xi, t)

    def gamma_t(self, x, xi, t):
        xi = np.atleast_1d(np.asarray(xi, float))
        t = np.atleast_1d(np.asarray(t, float))
        pp = self.expansion.principal
        base = pp.c2 if pp.kind == "double" else 0.0
        return base + self._series(x, xi, t, derivative=True)

    def breakpoints(self, x, t):
        return (self.params.a, x)

    def atoms(self, x, t):
        return ()


def respond_kernel(kernel, initial: InitialData, forcing: Optional[Forcing], params: Params,
                   grid: Grid, panels: Optional[int] = None, order: int = 16) -> ResponseField:
    """Response from a time-domain kernel by direct convolution with the data.

    ``kernel`` supplies ``gamma(x, xi, t)`` (matrix over ``xi`` and ``t``),
    ``breakpoints(x, t)`` (spatial discontinuities), and the time derivative
    as a regular part ``gamma_t`` (optional) plus ``atoms(x, t)``, the delta
    contributions ``(xi*, weight)`` of moving wavefronts.  A kernel may
    also offer ``force_term(x, t, forcing, nodes, weights)`` to take over
    the double force integral; otherwise it is done by tensor quadrature.
    """
    forcing = forcing or Forcing.none()
    c, h1, h2, h3, L, a = params.c, params.h1, params.h2, params.h3, params.L, params.a
    x = np.asarray(grid.x, float)
    t = _with_origin(grid.t)
    panels = panels or getattr(kernel, "panels", 8)
    u0b = initial.displacement(np.array([0.0, L, a]))
    data_breaks = tuple(initial.breakpoints) + tuple(forcing.breakpoints)
    gt = getattr(kernel, "gamma_t", None)

    def data_terms(xj, nodes, weights, times):
        acc = np.zeros(len(times))
        if not initial.zero_u and gt is not None:
            acc += (weights * initial.displacement(nodes)) @ gt(xj, nodes, times)
        if not initial.zero_v:
            acc += (weights * initial.velocity(nodes)) @ kernel.gamma(xj, nodes, times)
        return acc

    def column(xj):
        col = np.zeros(len(t))
        for b, hb, ub in ((0.0, h1, u0b[0]), (L, h2, u0b[1]), (a, 2 * h3, u0b[2])):
            if hb * ub != 0:
                col += hb * ub / c * kernel.gamma(xj, [b], t)[0]
        inner = np.zeros(len(t))
        if getattr(kernel, "static_breaks", False):
            nodes, weights = gauss_panels(0.0, L, tuple(kernel.breakpoints(xj, 0.0)) + data_breaks,
                                          panels, order)
            inner += data_terms(xj, nodes, weights, t)
        for i, ti in enumerate(t):
            if not getattr(kernel, "static_breaks", False):
                nodes, weights = gauss_panels(0.0, L, tuple(kernel.breakpoints(xj, ti)) + data_breaks,
                                              panels, order)
                inner[i] += data_terms(xj, nodes, weights, np.array([ti]))[0]
            if not initial.zero_u:
                for xs, wgt in kernel.atoms(xj, ti):
                    inner[i] += wgt * float(initial.displacement(np.array(xs)))
            if not forcing.is_zero and ti > 0:
                if hasattr(kernel, "force_term"):
                    inner[i] += kernel.force_term(xj, ti, forcing, nodes, weights)
                else:
                    inner[i] += _generic_force(kernel, xj, ti, forcing, nodes, weights, order)
        return col + inner / c ** 2

    cols = parallel_map(column, list(x))
    u = np.array(cols).T
    meta = {"route": "kernel", "kernel": type(kernel).__name__,
            "max_abs": float(np.max(np.abs(u), initial=0.0))}
    return ResponseField(x, t, u, meta)


def _generic_force(kernel, x, t, forcing: Forcing, nodes, weights, order: int = 16) -> float:
    """``int_0^t int_0^L Gamma(x, xi, t - tau) p(xi, tau) d xi d tau`` by tensor quadrature."""
    rate = getattr(kernel, "rate", 1.0)
    tau, wt = gauss_panels(0.0, t, (), max(2, int(math.ceil(rate * t / 6.0))), order)
    gam = kernel.gamma(x, nodes, t - tau)  # (n_xi, n_tau)
    if forcing.p is None:
        spatial = (weights * np.asarray(forcing.f(nodes), float)) @ gam
        return float(spatial @ (wt * forcing.time_profile(tau)))
    vals = forcing.value(nodes[:, None], tau[None, :])
    return float(np.sum(weights[:, None] * wt[None, :] * gam * vals))
