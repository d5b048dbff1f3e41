"""Characteristic polynomial, its roots, and the eigenvalue ladders they generate.

For ``a/L = q/p`` the substitution ``z = exp(2 s L / (p c))`` turns the
characteristic equation into the sparse polynomial

    A1 z^p + A2 z^(p-q) + A3 z^q + A4 = 0

and every root ``z_k`` produces an arithmetic ladder of eigenvalues on a
vertical line of the complex plane.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, CriticalCoefficientError
from .params import (CRITICAL_TOL, DEFAULT_MAX_DENOMINATOR, Params, RationalPosition,
                     rationalize_position, snap_position)

DEFAULT_N = 40
CLUSTER_TOL = 1e-7
RESIDUAL_TARGET = 1e-10


@dataclass(frozen=True)
class CharPolynomial:
    p: int
    q: int
    A1: float
    A2: float
    A3: float
    A4: float

    @property
    def coeffs(self) -> np.ndarray:
        """Dense coefficients, constant term first (``coeffs[j]`` multiplies ``z**j``)."""
        c = np.zeros(self.p + 1)
        c[self.p] += self.A1
        c[self.p - self.q] += self.A2
        c[self.q] += self.A3
        c[0] += self.A4
        return c

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.A1 * z ** self.p + self.A2 * z ** (self.p - self.q)
                + self.A3 * z ** self.q + self.A4)


@dataclass
class RootSet:
    roots: np.ndarray
    multiplicities: np.ndarray
    residual: float

    def __len__(self):
        return len(self.roots)

    @property
    def degree(self) -> int:
        return int(np.sum(self.multiplicities))

    @property
    def all_simple(self) -> bool:
        return bool(np.all(self.multiplicities == 1))


@dataclass
class EigenvalueLadder:
    k: int
    z: complex
    n: np.ndarray
    s: np.ndarray
    multiplicity: int = 1

    @property
    def re_line(self) -> float:
        return float(self.s[0].real) if len(self.s) else float("nan")


@dataclass(frozen=True)
class MidpointQuadratic:
    A: float
    B: float
    C: float
    D: float


@dataclass
class Spectrum:
    """Eigenvalue ladders of one (snapped) parameter set."""

    params: Params
    position: RationalPosition
    poly: CharPolynomial
    roots: RootSet
    ladders: List[EigenvalueLadder] = field(default_factory=list)

    def eigenvalues(self, include_zero: bool = True) -> np.ndarray:
        s = np.concatenate([lad.s for lad in self.ladders]) if self.ladders else np.empty(0, complex)
        if not include_zero:
            s = s[np.abs(s) > 0]
        return s

    def rows(self):
        """Flat ``(k, n, Re s, Im s, |z_k|, Arg z_k)`` records."""
        out = []
        for lad in self.ladders:
            for n, s in zip(lad.n, lad.s):
                out.append((lad.k, int(n), s.real, s.imag, abs(lad.z), _arg(lad.z)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "n", "re_s", "im_s", "abs_z", "arg_z"])
        for r in self.rows():
            w.writerow([r[0], r[1], repr(r[2]), repr(r[3]), repr(r[4]), repr(r[5])])
        return buf.getvalue()


def _arg(z: complex) -> float:
    """Principal argument in (-pi, pi]."""
    a = math.atan2(z.imag, z.real)
    return math.pi if a == -math.pi else a


def build_char_poly(params: Params, position: RationalPosition,
                    allow_critical: bool = False, tol: float = CRITICAL_TOL) -> CharPolynomial:
    """Coefficients ``A1..A4`` of the algebraic characteristic equation.

    Raises
    ------
    CriticalCoefficientError
        When ``A1`` or ``A4`` vanishes (some ``h_i = +-1``), unless
        ``allow_critical`` is set.
    """
    h1, h2, h3 = params.h1, params.h2, params.h3
    A1 = (1 + h1) * (1 + h2) * (1 + h3)
    A2 = h3 * (1 - h1) * (1 + h2)
    A3 = h3 * (1 + h1) * (1 - h2)
    A4 = -(1 - h1) * (1 - h2) * (1 - h3)
    if not allow_critical and (abs(A1) < tol or abs(A4) < tol):
        raise CriticalCoefficientError(
            f"critical parameters: A1={A1:.3g}, A4={A4:.3g}; the spectral method does not apply")
    return CharPolynomial(position.p, position.q, A1, A2, A3, A4)


def _horner(c: np.ndarray, z: complex) -> Tuple[complex, complex]:
    """Value and derivative of ``sum c[j] z**j``."""
    val = 0j
    der = 0j
    for cj in c[::-1]:
        der = der * z + val
        val = val * z + cj
    return val, der


def _backward_residual(c: np.ndarray, z: complex) -> float:
    val, _ = _horner(c, z)
    scale = float(np.sum(np.abs(c) * np.abs(z) ** np.arange(len(c))))
    return abs(val) / scale if scale > 0 else abs(val)


def _polish(c: np.ndarray, z: complex, maxiter: int = 50) -> complex:
    best = z
    best_res = _backward_residual(c, z)
    for _ in range(maxiter):
        val, der = _horner(c, z)
        if der == 0:
            break
        z = z - val / der
        res = _backward_residual(c, z)
        if res < best_res:
            best, best_res = z, res
        elif res >= best_res:
            break
        if best_res < 1e-16:
            break
    return best


def _enforce_conjugates(roots: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    roots = roots.astype(complex).copy()
    small = np.abs(roots.imag) <= tol * np.maximum(np.abs(roots), 1e-300)
    roots[small] = roots[small].real
    upper = [i for i in range(len(roots)) if roots[i].imag > 0 and not small[i]]
    lower = [i for i in range(len(roots)) if roots[i].imag < 0 and not small[i]]
    if len(upper) != len(lower):
        return roots
    free = list(lower)
    for i in upper:
        j = min(free, key=lambda j: abs(roots[i] - np.conj(roots[j])))
        free.remove(j)
        z = 0.5 * (roots[i] + np.conj(roots[j]))
        roots[i], roots[j] = z, np.conj(z)
    return roots


def _cluster(roots: np.ndarray, tol: float = CLUSTER_TOL):
    used = np.zeros(len(roots), bool)
    reps, mult = [], []
    order = np.argsort(-np.abs(roots), kind="stable")
    for i in order:
        if used[i]:
            continue
        near = [j for j in order if not used[j]
                and abs(roots[j] - roots[i]) <= tol * max(abs(roots[i]), 1.0)]
        for j in near:
            used[j] = True
        reps.append(np.mean(roots[near]))
        mult.append(len(near))
    return np.array(reps, dtype=complex), np.array(mult, dtype=int)


def find_roots(poly: CharPolynomial, polish: bool = True) -> RootSet:
    """All roots of the characteristic polynomial.

    Companion-matrix eigenvalues (LAPACK, with balancing) are refined by
    Newton steps on the dense polynomial; roots closer than a relative
    ``1e-7`` are merged into one entry with its multiplicity.  Exact zero
    roots (``A4 = 0``) are split off before the companion step.
    """
    c = poly.coeffs
    if abs(c[-1]) == 0:
        raise CriticalCoefficientError("leading coefficient A1 vanishes")
    nz = int(np.argmax(np.abs(c) > 0))
    reduced = c[nz:]
    deg = len(reduced) - 1
    if deg >= 1:
        monic = reduced / reduced[-1]
        comp = np.zeros((deg, deg), dtype=float)
        comp[1:, :-1] = np.eye(deg - 1)
        comp[:, -1] = -monic[:-1]
        raw = scipy.linalg.eigvals(comp)
    else:
        raw = np.empty(0, complex)
    if polish:
        raw = np.array([_polish(reduced, z) for z in raw], dtype=complex)
    raw = _enforce_conjugates(raw)
    reps, mult = _cluster(raw)
    if nz:
        reps = np.append(reps, 0j)
        mult = np.append(mult, nz)
    residual = max((_backward_residual(c, z) for z, m in zip(reps, mult) if m == 1 and z != 0),
                   default=0.0)
    if residual > RESIDUAL_TARGET:
        raise ConvergenceFailure(f"root residual {residual:.2e} above target {RESIDUAL_TARGET:.0e}")
    return RootSet(reps, mult, residual)


def ladder(roots: RootSet, n_range, params: Params,
           position: RationalPosition) -> List[EigenvalueLadder]:
    """Expand each root into its eigenvalue ladder.

    ``n_range`` is an int ``N`` (meaning ``-N..N``) or an explicit pair
    ``(n_lo, n_hi)``.  Ladders of negative real roots carry one extra index
    ``n_lo - 1`` so that the emitted set is closed under conjugation.
    """
    n_lo, n_hi = (-n_range, n_range) if np.isscalar(n_range) else n_range
    scale = position.p * params.c / (2 * params.L)
    out = []
    for k, (z, m) in enumerate(zip(roots.roots, roots.multiplicities)):
        if z == 0:
            continue
        arg = _arg(z)
        lo = n_lo - 1 if (arg == math.pi and n_lo == -n_hi) else n_lo
        n = np.arange(lo, n_hi + 1)
        s = scale * (math.log(abs(z)) + 1j * (arg + 2 * math.pi * n))
        out.append(EigenvalueLadder(k=k, z=complex(z), n=n, s=s, multiplicity=int(m)))
    return out


def eigenvalues_no_internal(params: Params, n_range=DEFAULT_N) -> EigenvalueLadder:
    """Closed-form ladder for the bar without internal damper."""
    h1, h2 = params.h1, params.h2
    num = (1 - h1) * (1 - h2)
    den = (1 + h1) * (1 + h2)
    if abs(num) < CRITICAL_TOL or abs(den) < CRITICAL_TOL:
        raise CriticalCoefficientError("h1 or h2 equals +-1; no eigenvalue ladder")
    r = num / den
    n_lo, n_hi = (-n_range, n_range) if np.isscalar(n_range) else n_range
    arg = _arg(complex(r))
    if arg == math.pi and n_lo == -n_hi:
        n_lo -= 1
    n = np.arange(n_lo, n_hi + 1)
    s = params.c / (2 * params.L) * (math.log(abs(r)) + 1j * (arg + 2 * math.pi * n))
    return EigenvalueLadder(k=0, z=complex(r), n=n, s=s)


def midpoint_quadratic(params: Params) -> MidpointQuadratic:
    h1, h2, h3 = params.h1, params.h2, params.h3
    A = (1 + h1) * (1 + h2) * (1 + h3)
    B = 2 * h3 * (1 - h1 * h2)
    C = -(1 - h1) * (1 - h2) * (1 - h3)
    D = (1 - h1 ** 2) * (1 - h2 ** 2) + h3 ** 2 * (h1 - h2) ** 2
    return MidpointQuadratic(A, B, C, D)


def midpoint_roots(params: Params, tol: float = CRITICAL_TOL) -> Tuple[MidpointQuadratic, RootSet]:
    """Explicit roots of the quadratic obtained for a damper at mid-span."""
    quad = midpoint_quadratic(params)
    if abs(quad.A) < tol or abs(quad.C) < tol:
        raise CriticalCoefficientError("A or C vanishes; critical parameters")
    h1, h2, h3 = params.h1, params.h2, params.h3
    b = -h3 * (1 - h1 * h2)
    if abs(quad.D) <= tol:
        z = b / quad.A
        return quad, RootSet(np.array([z], complex), np.array([2]), 0.0)
    sq = math.sqrt(quad.D) if quad.D > 0 else 1j * math.sqrt(-quad.D)
    z = np.array([(b + sq) / quad.A, (b - sq) / quad.A], dtype=complex)
    poly = np.array([quad.C, quad.B, quad.A])
    res = max(_backward_residual(poly, zz) for zz in z)
    return quad, RootSet(z, np.array([1, 1]), res)


def compute_spectrum(params: Params, n_range=DEFAULT_N,
                     max_denominator: int = DEFAULT_MAX_DENOMINATOR,
                     position: Optional[RationalPosition] = None) -> Spectrum:
    """Full pipeline: rationalize, snap, build polynomial, find roots, expand ladders."""
    if position is None:
        position = rationalize_position(params.a, params.L, max_denominator)
    snapped = snap_position(params, position)
    poly = build_char_poly(snapped, position)
    roots = find_roots(poly)
    return Spectrum(snapped, position, poly, roots, ladder(roots, n_range, snapped, position))


def cluster_lines(values: Sequence[float], tol: float = 1e-9) -> List[float]:
    """Group real parts into distinct vertical lines (absolute tolerance)."""
    lines: List[float] = []
    for v in sorted(values):
        if not lines or abs(v - lines[-1]) > tol:
            lines.append(v)
    return lines
