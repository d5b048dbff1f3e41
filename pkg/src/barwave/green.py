"""Laplace-domain Green's function, partial-fraction coefficients and the time kernel."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (ExpansionInvalidError, MultiplicityError, PoleProximityError,
                     UnsupportedDoublePoleError)
from .modes import ModeBasis
from .params import (CRITICAL_TOL, DEFAULT_MAX_DENOMINATOR, Params, classify,
                     rationalize_position)
from .spectrum import DEFAULT_N, Spectrum, compute_spectrum

POLE_TOL = 1e-12
SIMPLE_TOL = 1e-8


def same_side(x, xi, a):
    """``H_a(x, xi)``: 1 when ``x`` and ``xi`` lie on the same side of ``a``, else 0."""
    x, xi = np.asarray(x, float), np.asarray(xi, float)
    return np.where((x >= a) & (xi >= a), 1.0, 0.0) + np.where((a >= x) & (a >= xi), 1.0, 0.0) \
        - np.where((x == a) & (xi == a), 1.0, 0.0)


def _g_phipsi(b: ModeBasis, x, xi, s):
    h1, h2, L, c = b.h1, b.h2, b.L, b.c
    d, m = np.abs(x - xi), x + xi
    return 0.25 * ((1 + h1) * (1 + h2) * np.exp(s * (L - d) / c)
                   + (1 - h1) * (1 + h2) * np.exp(s * (L - m) / c)
                   + (1 + h1) * (1 - h2) * np.exp(-s * (L - m) / c)
                   + (1 - h1) * (1 - h2) * np.exp(-s * (L - d) / c))


def _g_spsi(b: ModeBasis, x, xi, s):
    h2, L, a, c = b.h2, b.L, b.a, b.c
    d, m = np.abs(x - xi), x + xi
    return 0.25 * ((1 + h2) * np.exp(s * (L - a - d) / c)
                   - (1 + h2) * np.exp(s * (L + a - m) / c)
                   + (1 - h2) * np.exp(-s * (L + a - m) / c)
                   - (1 - h2) * np.exp(-s * (L - a - d) / c))


def _g_sphi(b: ModeBasis, x, xi, s):
    h1, a, c = b.h1, b.a, b.c
    d, m = np.abs(x - xi), x + xi
    return 0.25 * ((1 + h1) * np.exp(s * (a - d) / c)
                   - (1 + h1) * np.exp(s * (m - a) / c)
                   + (1 - h1) * np.exp(-s * (m - a) / c)
                   - (1 - h1) * np.exp(-s * (a - d) / c))


def green_numerator(x, xi, s, basis: ModeBasis):
    """Bracketed factor ``F`` in ``G = c F / (s Delta_a)``."""
    x, xi = np.asarray(x, float), np.asarray(xi, float)
    a, h3 = basis.a, basis.h3
    right = np.where((x >= a) & (xi >= a), 1.0, 0.0)
    left = np.where((a >= x) & (a >= xi), 1.0, 0.0)
    F = _g_phipsi(basis, x, xi, s)
    if h3 != 0:
        F = F + 2 * h3 * right * basis.phi(a, s) * _g_spsi(basis, x, xi, s) \
            + 2 * h3 * left * basis.psi(a, s) * _g_sphi(basis, x, xi, s)
    return F


def green_laplace(x, xi, s, basis: ModeBasis):
    """Green's function of the transformed boundary problem.

    Raises
    ------
    PoleProximityError
        If ``s`` sits on (or numerically at) a pole: ``s = 0`` or a zero of
        ``Delta_a``.
    """
    mant, shift = basis.delta_a_scaled(s)
    scale = basis.delta_a_scale(s) * np.exp(-shift)
    if abs(s) == 0 or np.any(np.abs(mant) < POLE_TOL * scale):
        raise PoleProximityError(f"s={s} is within tolerance of a pole of G")
    return basis.c * green_numerator(x, xi, s, basis) / (s * basis.delta_a(s))


def green_piecewise(x: float, xi: float, s, basis: ModeBasis):
    """Green's function assembled from the case-by-case products (reference path)."""
    pre = basis.c / (s * basis.delta_a(s))
    if xi > basis.a:
        return pre * (basis.phi_a(x, s) * basis.psi(xi, s) if x < xi
                      else basis.psi(x, s) * basis.phi_a(xi, s))
    return pre * (basis.phi(x, s) * basis.psi_a(xi, s) if x < xi
                  else basis.psi_a(x, s) * basis.phi(xi, s))


# -- residue coefficients ------------------------------------------------------

def _square_integral(alpha, beta, k, x1, x2):
    """Exact integral of ``(alpha e^{kx} + beta e^{-kx})**2`` over ``[x1, x2]``."""
    return (alpha ** 2 * (np.exp(2 * k * x2) - np.exp(2 * k * x1)) / (2 * k)
            + 2 * alpha * beta * (x2 - x1)
            - beta ** 2 * (np.exp(-2 * k * x2) - np.exp(-2 * k * x1)) / (2 * k))


def modal_square_integral(s, basis: ModeBasis):
    """Closed-form ``int_0^L phi_a(xi, s)^2 d xi``."""
    k = s / basis.c
    left = _square_integral(0.5 * (1 + basis.h1), 0.5 * (1 - basis.h1), k, 0.0, basis.a)
    alpha, beta = basis.phi_a_right_coeffs(s)
    right = _square_integral(alpha, beta, k, basis.a, basis.L)
    return left + right


def residue_coefficient(s_n, basis: ModeBasis, multiplicity: int = 1):
    """Normalization ``A_n`` of the partial fraction at the eigenvalue ``s_n``.

    The modal integral of ``phi_a**2`` is evaluated in closed form, piece by
    piece on ``[0, a]`` and ``[a, L]``.
    """
    if multiplicity != 1:
        raise MultiplicityError(f"eigenvalue {s_n} has multiplicity {multiplicity}")
    scale = basis.delta_a_scale(s_n) * basis.L / basis.c
    if abs(basis.delta_a_prime(s_n)) < SIMPLE_TOL * scale:
        raise MultiplicityError(f"eigenvalue {s_n} is not a simple zero of Delta_a")
    c, h1, h2, h3 = basis.c, basis.h1, basis.h2, basis.h3
    return (2 * s_n / c ** 2 * modal_square_integral(s_n, basis)
            + h1 / c * basis.phi_a(0.0, s_n) ** 2
            + h2 / c * basis.phi_a(basis.L, s_n) ** 2
            + 2 * h3 / c * basis.phi_a(basis.a, s_n) ** 2)


def residue_coefficient_simplified(s_n, basis: ModeBasis):
    """Condensed closed form of ``A_n`` built only from ``h1``, ``h3`` and ``phi(a)``.

    Kept as a cross-check; it agrees with :func:`residue_coefficient` only
    on a subset of parameters (see tests), the integral form is authoritative.
    """
    c, h1, h3, L, a = basis.c, basis.h1, basis.h3, basis.L, basis.a
    pa = basis.phi(a, s_n)
    ep, em = np.exp(s_n * a / c), np.exp(-s_n * a / c)
    bracket = ((2 * (L - 0.5 * a) * (h1 - 1) * em + 2 * (h1 + 1) * (L - 0.5 * a) * ep) * pa
               + 0.5 * a * (h1 - 1) ** 2 * em ** 2 - 0.5 * a * (h1 + 1) ** 2 * ep ** 2)
    return -s_n / c ** 2 * (4 * (L - a) * pa ** 2 * h3 + bracket * h3 + L * (h1 ** 2 - 1))


def residue_coefficient_from_derivative(s_n, x, xi, basis: ModeBasis, dprime=None):
    """``A_n = s_n Delta_a'(s_n) phi_a(x) phi_a(xi) / (c F(x, xi, s_n))``.

    ``dprime`` overrides the derivative of Delta_a; by default it is obtained
    from a Cauchy integral on a small circle, independent of the analytic form.
    """
    if dprime is None:
        dprime = contour_derivative(basis.delta_a, s_n, radius=1e-2 * basis.c / basis.L)
    F = green_numerator(x, xi, s_n, basis)
    return s_n * dprime * basis.phi_a(x, s_n) * basis.phi_a(xi, s_n) / (basis.c * F)


def contour_derivative(f, z0, radius: float, m: int = 64):
    """First derivative of an analytic ``f`` at ``z0`` by the trapezoidal Cauchy formula."""
    theta = 2 * np.pi * np.arange(m) / m
    w = radius * np.exp(1j * theta)
    vals = np.array([f(z0 + wk) for wk in w])
    return np.mean(vals / w)


def contour_residue(f, z0, radius: float, m: int = 64, power: int = 0):
    """``(1 / 2 pi i) * contour integral of (z - z0)**power f(z)`` around ``z0``."""
    theta = 2 * np.pi * np.arange(m) / m
    w = radius * np.exp(1j * theta)
    vals = np.array([f(z0 + wk) for wk in w])
    return np.mean(vals * w ** (power + 1))


# -- principal part at s = 0 ---------------------------------------------------

def numerator_slope(x, xi, basis: ModeBasis):
    """``dF/ds`` at ``s = 0`` for the bracket ``F`` of :func:`green_numerator`."""
    x, xi = np.asarray(x, float), np.asarray(xi, float)
    h1, h2, h3, L, a, c = basis.h1, basis.h2, basis.h3, basis.L, basis.a, basis.c
    d, m = np.abs(x - xi), x + xi
    slope = 0.25 * ((1 + h1) * (1 + h2) * (L - d) + (1 - h1) * (1 + h2) * (L - m)
                    - (1 + h1) * (1 - h2) * (L - m) - (1 - h1) * (1 - h2) * (L - d)) / c
    right = np.where((x >= a) & (xi >= a), 1.0, 0.0)
    left = np.where((a >= x) & (a >= xi), 1.0, 0.0)
    return slope + h3 * (right * (m - d - 2 * a) + left * (2 * a - d - m)) / c


@dataclass(frozen=True)
class PrincipalPart:
    """Principal part of ``G`` at ``s = 0``.

    ``kind`` is ``"simple"`` (``c / (Delta_a(0) s)``) or ``"double"``
    (``c1(x, xi)/s + c2/s**2``).  In the double case ``Delta_a`` has a simple
    zero at the origin with Taylor coefficients ``d1``, ``d2``, so that
    ``c2 = c/d1`` and ``c1 = (c/d1) (F'(0) - d2/d1)``.
    """

    kind: str
    params: Params
    constant: float = 0.0
    c2: float = 0.0
    d1: float = 0.0
    d2: float = 0.0

    def c1(self, x, xi):
        if self.kind == "simple":
            return self.constant * np.ones(np.broadcast(np.asarray(x), np.asarray(xi)).shape)
        slope = numerator_slope(x, xi, ModeBasis(self.params))
        return self.params.c / self.d1 * (slope - self.d2 / self.d1)

    def gamma(self, x, xi, t):
        """Time-domain contribution: a constant, or ``c1 + c2 t``."""
        t = np.asarray(t, float)
        if self.kind == "simple":
            return self.constant + 0.0 * t
        return self.c1(x, xi) + self.c2 * t

    def laplace(self, x, xi, s):
        if self.kind == "simple":
            return self.constant / s
        return self.c1(x, xi) / s + self.c2 / s ** 2


def family_c1_printed(x, xi, params: Params):
    """Printed closed form of ``c1`` for the family ``h2 = 1/h1``, ``h3 = -(h1+h2)/2``.

    Matches :meth:`PrincipalPart.c1` unless both points lie left of ``a``.
    """
    h1, c, L, a = params.h1, params.c, params.L, params.a
    x, xi = np.asarray(x, float), np.asarray(xi, float)
    den = L * (h1 ** 2 - 1) - a * (h1 ** 4 - 1)
    d, m = np.abs(x - xi), x + xi
    return h1 * c / (2 * den) * ((h1 ** 2 + 1) * (d - m + 2 * a) * same_side(x, xi, a)
                                 - (h1 ** 2 + 1) * d + (h1 ** 2 - 1) * m + 2 * L)


def family_c2(params: Params) -> float:
    """Closed form of ``c2`` for the family ``h2 = 1/h1``, ``h3 = -(h1+h2)/2``."""
    h1 = params.h1
    return h1 ** 2 * params.c ** 2 / (params.L * (h1 ** 2 - 1) - params.a * (h1 ** 4 - 1))


def principal_part(params: Params, basis: Optional[ModeBasis] = None,
                   tol: float = CRITICAL_TOL) -> PrincipalPart:
    """Principal part of the Green's function at ``s = 0``.

    Raises
    ------
    UnsupportedDoublePoleError
        When ``Delta_a`` vanishes to second order at the origin (pole of
        order three or more).
    """
    d0 = params.rigid_denominator
    if abs(d0) > tol:
        return PrincipalPart("simple", params, constant=params.c / d0)
    basis = basis or ModeBasis(params)
    d1 = float(np.real(basis.delta_a_prime(0.0)))
    scale = params.L / params.c * (1 + abs(params.h1)) * (1 + abs(params.h2)) * (1 + abs(params.h3))
    if abs(d1) < 1e-10 * scale:
        raise UnsupportedDoublePoleError("pole at s=0 has multiplicity above two")
    d2 = 0.5 * float(np.real(basis.delta_a_second(0.0)))
    return PrincipalPart("double", params, c2=params.c / d1, d1=d1, d2=d2)


# -- expansion -----------------------------------------------------------------

@dataclass
class GreenExpansion:
    """Partial-fraction expansion of ``G``: principal part plus one term per eigenvalue."""

    params: Params
    spectrum: Spectrum
    principal: PrincipalPart
    s: np.ndarray
    A: np.ndarray
    k: np.ndarray
    n: np.ndarray
    N: int

    @property
    def basis(self) -> ModeBasis:
        return ModeBasis(self.params)

    def modes(self, x):
        """Matrix ``phi_a(x_j, s_m)`` of shape ``(len(s), len(x))``."""
        x = np.atleast_1d(np.asarray(x, float))
        return self.basis.phi_a(x[None, :], self.s[:, None])

    def to_json(self) -> str:
        return json.dumps([
            {"k": int(k), "n": int(n), "s_re": s.real, "s_im": s.imag, "A_re": A.real, "A_im": A.imag}
            for k, n, s, A in zip(self.k, self.n, self.s, self.A)])


def build_expansion(params: Params, N: int = DEFAULT_N,
                    max_denominator: int = DEFAULT_MAX_DENOMINATOR,
                    spectrum: Optional[Spectrum] = None) -> GreenExpansion:
    """Assemble the modal expansion of the Green's function.

    Raises
    ------
    ExpansionInvalidError
        In critical regimes (some ``h_i = +-1``).
    MultiplicityError
        When a nonzero eigenvalue is multiple.
    """
    position = rationalize_position(params.a, params.L, max_denominator)
    cls = classify(params, position)
    if cls.is_critical:
        raise ExpansionInvalidError(
            f"critical parameters {sorted(cls.critical_flags)}: modal expansion does not apply")
    if spectrum is None:
        spectrum = compute_spectrum(params, N, position=position)
    snapped = spectrum.params
    basis = ModeBasis(snapped)
    principal = principal_part(snapped, basis)
    ss, ks, ns = [], [], []
    for lad in spectrum.ladders:
        for n, s in zip(lad.n, lad.s):
            if abs(s) < 1e-12 * snapped.c / snapped.L:
                continue  # s = 0 belongs to the principal part
            if lad.multiplicity != 1:
                raise MultiplicityError(f"root z={lad.z} has multiplicity {lad.multiplicity}")
            ss.append(s)
            ks.append(lad.k)
            ns.append(n)
    s = np.array(ss, complex)
    order = np.lexsort((s.imag, np.abs(s.imag)))
    s = s[order]
    A = np.array([residue_coefficient(si, basis) for si in s], complex)
    return GreenExpansion(snapped, spectrum, principal, s, A,
                          np.array(ks)[order], np.array(ns)[order], N)


def gamma_time(x, xi, t, expansion: GreenExpansion, return_imag: bool = False):
    """Time-domain kernel ``Gamma(x, xi, t)`` from the truncated expansion.

    ``x`` is a scalar; ``xi`` and ``t`` broadcast against each other.
    """
    xi = np.asarray(xi, float)
    t = np.asarray(t, float)
    b = expansion.basis
    px = b.phi_a(x, expansion.s)
    pxi = b.phi_a(xi[..., None], expansion.s)
    ex = np.exp(np.multiply.outer(t, expansion.s))
    total = np.sum(px * pxi * ex / expansion.A, axis=-1)
    val = expansion.principal.gamma(x, xi, t) + total.real
    if return_imag:
        return val, float(np.max(np.abs(total.imag), initial=0.0))
    return val
