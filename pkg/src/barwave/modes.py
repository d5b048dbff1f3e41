"""Fundamental solutions, eigenmodes and characteristic functions.

All evaluators accept a complex spectral argument ``s`` and broadcast over
``x``.  Hyperbolic functions are written in exponential form; the
characteristic function additionally has a log-scaled variant that factors
out the dominant exponential.
"""

from __future__ import annotations

import numpy as np

from .params import Params


def heaviside(x):
    """Unit step with ``H(0) = 1``."""
    return np.where(np.asarray(x) >= 0, 1.0, 0.0)


class ModeBasis:
    """Evaluators of phi, psi, phi_a, psi_a, Delta and Delta_a for one bar.

    Parameters
    ----------
    params : Params
        Bar parameters.  The damper position used is ``params.a`` as is;
        callers working from a rationalized spectrum should pass snapped
        parameters (see :func:`barwave.params.snap_position`).
    """

    def __init__(self, params: Params):
        self.params = params
        self.h1, self.h2, self.h3 = params.h1, params.h2, params.h3
        self.a, self.L, self.c = params.a, params.L, params.c

    # -- fundamental solutions -------------------------------------------------

    def phi(self, x, s):
        """Solution satisfying the left boundary condition, ``phi(0, s) = 1``."""
        e = s * np.asarray(x) / self.c
        return 0.5 * ((1 + self.h1) * np.exp(e) + (1 - self.h1) * np.exp(-e))

    def psi(self, x, s):
        """Solution satisfying the right boundary condition, ``psi(L, s) = 1``."""
        e = s * (self.L - np.asarray(x)) / self.c
        return 0.5 * ((1 + self.h2) * np.exp(e) + (1 - self.h2) * np.exp(-e))

    def phi_a(self, x, s):
        """Left solution of the problem with the internal damper (eigenmode at an eigenvalue)."""
        x = np.asarray(x, dtype=float)
        jump = 2 * self.h3 * self.phi(self.a, s) * np.sinh(s * (x - self.a) / self.c)
        return self.phi(x, s) + np.where(x >= self.a, jump, 0.0)

    def psi_a(self, x, s):
        x = np.asarray(x, dtype=float)
        jump = 2 * self.h3 * self.psi(self.a, s) * np.sinh(s * (self.a - x) / self.c)
        return self.psi(x, s) + np.where(self.a - x >= 0, jump, 0.0)

    def phi_a_right_coeffs(self, s):
        """``(alpha, beta)`` with ``phi_a = alpha e^{sx/c} + beta e^{-sx/c}`` for ``x >= a``."""
        pa = self.phi(self.a, s)
        ea = np.exp(s * self.a / self.c)
        alpha = 0.5 * (1 + self.h1) + self.h3 * pa / ea
        beta = 0.5 * (1 - self.h1) - self.h3 * pa * ea
        return alpha, beta

    # -- characteristic functions ---------------------------------------------

    def delta(self, s):
        """Characteristic function without the internal damper."""
        e = s * self.L / self.c
        return 0.5 * ((1 + self.h1) * (1 + self.h2) * np.exp(e)
                      - (1 - self.h1) * (1 - self.h2) * np.exp(-e))

    def _delta_a_terms(self, s):
        h1, h2, h3 = self.h1, self.h2, self.h3
        s = np.asarray(s, dtype=complex)
        coeffs = (
            (1 + h1) * (1 + h2) * (1 + h3),
            -(1 - h1) * (1 - h2) * (1 - h3),
            (1 - h1) * (1 + h2) * h3,
            (1 + h1) * (1 - h2) * h3,
        )
        lam = (self.L, -self.L, self.L - 2 * self.a, -(self.L - 2 * self.a))
        exps = [s * l / self.c for l in lam]
        return coeffs, exps

    def delta_a_scaled(self, s):
        """Return ``(mantissa, shift)`` with ``Delta_a(s) = mantissa * exp(shift)``.

        ``shift`` is the largest real part among the four exponents, so the
        mantissa stays finite for any finite ``s``.
        """
        coeffs, exps = self._delta_a_terms(s)
        shift = np.max(np.stack([e.real for e in exps]), axis=0)
        mant = 0.5 * sum(k * np.exp(e - shift) for k, e in zip(coeffs, exps))
        return mant, shift

    def delta_a(self, s):
        """Characteristic function with the internal damper, four-exponential form."""
        mant, shift = self.delta_a_scaled(s)
        with np.errstate(over="raise"):
            try:
                return mant * np.exp(shift)
            except FloatingPointError:
                raise OverflowError(
                    f"Delta_a overflows (log-scale {np.max(shift):.1f}); use delta_a_scaled")

    def delta_a_scale(self, s):
        """Sum of the term magnitudes of Delta_a, the natural size of its value near ``s``."""
        coeffs, exps = self._delta_a_terms(s)
        return 0.5 * sum(abs(k) * np.exp(e.real) for k, e in zip(coeffs, exps))

    def delta_a_hyperbolic(self, s):
        """Delta_a from its hyperbolic form (independent of the exponential form)."""
        h1, h2, h3, L, a, c = self.h1, self.h2, self.h3, self.L, self.a, self.c
        return ((1 + h1 * h2 + h3 * (h1 + h2)) * np.sinh(s * L / c)
                + (h1 + h2 + h3 * (1 + h1 * h2)) * np.cosh(s * L / c)
                + h3 * (h2 - h1) * np.sinh(s * (L - 2 * a) / c)
                + h3 * (1 - h1 * h2) * np.cosh(s * (L - 2 * a) / c))

    def delta_a_prime(self, s):
        """Analytic derivative of Delta_a with respect to ``s``."""
        coeffs, exps = self._delta_a_terms(s)
        lam = (self.L, -self.L, self.L - 2 * self.a, -(self.L - 2 * self.a))
        return 0.5 * sum(k * (l / self.c) * np.exp(e) for k, e, l in zip(coeffs, exps, lam))

    def delta_a_second(self, s):
        """Analytic second derivative of Delta_a with respect to ``s``."""
        coeffs, exps = self._delta_a_terms(s)
        lam = (self.L, -self.L, self.L - 2 * self.a, -(self.L - 2 * self.a))
        return 0.5 * sum(k * (l / self.c) ** 2 * np.exp(e) for k, e, l in zip(coeffs, exps, lam))
