import math

import numpy as np
import pytest

from barwave.errors import ExpansionInvalidError, MultiplicityError, PoleProximityError
from barwave.green import (build_expansion, contour_residue, family_c1_printed, family_c2, gamma_time,
                           green_laplace, green_numerator, green_piecewise, principal_part,
                           residue_coefficient, residue_coefficient_from_derivative,
                           residue_coefficient_simplified, same_side)
from barwave.modes import ModeBasis
from barwave.params import make_params
from barwave.spectrum import compute_spectrum

L, C = 1.8, 1.5
S = 0.4 + 2.3j


def _snapped(params):
    return compute_spectrum(params, 12)


def test_same_side():
    assert same_side(0.1, 0.2, 0.5) == 1 and same_side(0.6, 0.9, 0.5) == 1
    assert same_side(0.1, 0.9, 0.5) == 0 and same_side(0.5, 0.5, 0.5) == 1


def test_symmetry_and_piecewise(generic_params, rng):
    b = ModeBasis(generic_params)
    for _ in range(40):
        x, xi = rng.uniform(0, L, 2)
        g = green_laplace(x, xi, S, b)
        assert abs(g - green_laplace(xi, x, S, b)) <= 1e-12 * abs(g)
        assert abs(g - green_piecewise(x, xi, S, b)) <= 1e-12 * abs(g)


def _dx(b, x, xi, s, side, h=1e-6 * L):
    # one-sided second-order derivative in x
    g = lambda y: complex(green_laplace(y, xi, s, b))
    if side > 0:
        return (-3 * g(x) + 4 * g(x + h) - g(x + 2 * h)) / (2 * h)
    return (3 * g(x) - 4 * g(x - h) + g(x - 2 * h)) / (2 * h)


def test_derivative_jump_at_source(generic_params):
    b = ModeBasis(generic_params)
    for xi in (0.3, 1.2):
        jump = _dx(b, xi, xi, S, +1) - _dx(b, xi, xi, S, -1)
        assert abs(jump - (-1.0)) < 1e-6


def test_derivative_jump_at_damper(generic_params):
    b = ModeBasis(generic_params)
    a = b.a
    for xi in (0.3, 1.4):
        jump = _dx(b, a, xi, S, +1) - _dx(b, a, xi, S, -1)
        expected = 2 * b.h3 * S / b.c * green_laplace(a, xi, S, b)
        assert abs(jump - expected) < 1e-6 * max(1, abs(expected))


def test_boundary_conditions(generic_params):
    b = ModeBasis(generic_params)
    xi = 0.9
    g0 = green_laplace(0.0, xi, S, b)
    assert abs(_dx(b, 0.0, xi, S, +1) - b.h1 * S / b.c * g0) < 1e-6
    gL = green_laplace(L, xi, S, b)
    assert abs(_dx(b, L, xi, S, -1) + b.h2 * S / b.c * gL) < 1e-6


def test_pole_proximity(generic_params):
    spec = _snapped(generic_params)
    b = ModeBasis(spec.params)
    with pytest.raises(PoleProximityError):
        green_laplace(0.2, 0.3, spec.eigenvalues(False)[3], b)
    with pytest.raises(PoleProximityError):
        green_laplace(0.2, 0.3, 0.0, b)


@pytest.mark.parametrize("h", [(0.4, -0.3, 0.6), (0.3, 0.9, 0.7), (0.7, -1.5, 0.0), (2.0, 0.2, -0.4)])
def test_residue_oracles(h, rng):
    spec = _snapped(make_params(*h, 0.72, L, C))
    b = ModeBasis(spec.params)
    s_all = spec.eigenvalues(include_zero=False)
    s_all = s_all[np.argsort(np.abs(s_all))][:12]
    for s_n in s_all:
        A = residue_coefficient(s_n, b)
        x, xi = 0.37, 1.21
        f = lambda s: b.c * green_numerator(x, xi, s, b) / (s * b.delta_a(s))
        r = contour_residue(f, s_n, 1e-3 * C / L)
        expected = b.phi_a(x, s_n) * b.phi_a(xi, s_n) / A
        assert abs(r - expected) <= 1e-6 * abs(expected)
        vals = [residue_coefficient_from_derivative(s_n, *rng.uniform(0, L, 2), b,
                                                    dprime=b.delta_a_prime(s_n)) for _ in range(5)]
        assert np.max(np.abs(np.array(vals) - A)) <= 1e-8 * abs(A)


def test_free_free_first_coefficient():
    p = make_params(0, 0, 0, 0.72, L, C)
    s1 = 1j * math.pi * C / L
    assert residue_coefficient(s1, ModeBasis(p)) == pytest.approx(s1 * L / C ** 2, rel=1e-13)


def test_simplified_form_agrees_without_internal_damper():
    spec = _snapped(make_params(0.4, -0.3, 0.0, 0.72, L, C))
    b = ModeBasis(spec.params)
    for s_n in spec.eigenvalues(False)[:10]:
        A = residue_coefficient(s_n, b)
        assert abs(residue_coefficient_simplified(s_n, b) - A) <= 1e-10 * abs(A)


def test_principal_part_simple(fig_params):
    pp = principal_part(fig_params)
    assert pp.kind == "simple" and pp.constant == pytest.approx(0.3 / 2.6)
    b = ModeBasis(fig_params)
    s = 1e-5
    assert s * green_laplace(0.2, 1.1, s, b) == pytest.approx(pp.constant, rel=1e-4)


def test_principal_part_family():
    h1 = 0.5
    p = make_params(h1, 1 / h1, -(h1 + 1 / h1) / 2, 0.72, L, C)
    pp = principal_part(p)
    assert pp.kind == "double"
    assert pp.c2 == pytest.approx(family_c2(p), rel=1e-12)
    b = ModeBasis(p)
    for x, xi in ((0.2, 1.1), (1.0, 1.5), (0.1, 0.5)):
        f = lambda s: b.c * green_numerator(x, xi, s, b) / (s * b.delta_a(s))
        c1 = contour_residue(f, 0.0, 0.05)
        c2 = contour_residue(f, 0.0, 0.05, power=1)
        assert abs(c2 - pp.c2) < 1e-9 * abs(pp.c2)
        assert abs(c1 - pp.c1(x, xi)) < 1e-9 * max(1, abs(c1))
    # printed closed form agrees except when both points lie left of the damper
    assert family_c1_printed(1.0, 1.5, p) == pytest.approx(pp.c1(1.0, 1.5), rel=1e-10)
    assert family_c1_printed(0.2, 1.1, p) == pytest.approx(pp.c1(0.2, 1.1), rel=1e-10)


def test_principal_part_general_double_pole():
    p = make_params(0.3, -0.2, -0.05, 0.72, L, C)
    pp = principal_part(p)
    b = ModeBasis(p)
    assert pp.kind == "double"
    f = lambda s: b.c * green_numerator(0.4, 0.5, s, b) / (s * b.delta_a(s))
    assert abs(contour_residue(f, 0.0, 0.05) - pp.c1(0.4, 0.5)) < 1e-9


def test_expansion_rejects_critical():
    for h in ((1.0, 0.3, 0.2), (0.3, -1.0, 0.0), (0.2, 0.3, 1.0)):
        with pytest.raises(ExpansionInvalidError):
            build_expansion(make_params(*h, 0.72, L, C), 5)


def test_expansion_rejects_multiple_roots():
    with pytest.raises(MultiplicityError):
        build_expansion(make_params(0.0, 2.0, math.sqrt(3) / 2, 0.9, L, C), 5)


def test_expansion_laplace_reconstruction(generic_params):
    exp = build_expansion(generic_params, 200)
    b = exp.basis
    x, xi, s = 0.33, 1.27, 0.2 + 1.7j
    series = exp.principal.laplace(x, xi, s) + np.sum(
        b.phi_a(x, exp.s) * b.phi_a(xi, exp.s) / (exp.A * (s - exp.s)))
    exact = green_laplace(x, xi, s, b)
    assert abs(series - exact) < 2e-2 * abs(exact)


def test_gamma_time_real_and_conjugate_closed(generic_params):
    exp = build_expansion(generic_params, 20)
    g, imag = gamma_time(0.3, np.linspace(0, L, 11), 0.7, exp, return_imag=True)
    assert np.all(np.isfinite(g)) and np.max(np.abs(imag)) < 1e-12
    for v in exp.s:
        assert np.min(np.abs(exp.s - np.conj(v))) < 1e-10
