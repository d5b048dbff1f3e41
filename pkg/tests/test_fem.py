import math

import numpy as np
import pytest

from barwave.errors import MeshError, NumericalFailure
from barwave.fem import (assemble, fem_eigenvalues, fem_energy, fem_time_response, spectrum_csv,
                         spurious_report)
from barwave.green import build_expansion
from barwave.params import make_params
from barwave.response import Forcing, Grid, InitialData, exp_poly_terms, respond_modal
from barwave.spectrum import compute_spectrum

L, C = 1.8, 1.5


def test_small_mesh_by_hand():
    p = make_params(0.2, 0.3, 0.4, 0.9, L, C)
    m = assemble(p, 4)
    he = L / 4
    assert m.n_elements == 4 and m.damper_node == 2
    assert m.M[0, 0] == pytest.approx(he / 3) and m.M[1, 1] == pytest.approx(2 * he / 3)
    assert m.M[0, 1] == pytest.approx(he / 6)
    assert m.K[0, 0] == pytest.approx(C ** 2 / he) and m.K[1, 0] == pytest.approx(-C ** 2 / he)
    assert np.allclose(m.C.toarray(), np.diag([C * 0.2, 0, 2 * C * 0.4, 0, C * 0.3]))
    assert np.allclose(m.K @ np.ones(5), 0) and m.M.sum() == pytest.approx(L)
    lumped = assemble(p, 4, lumped=True)
    assert lumped.M.nnz == 5 and lumped.M.sum() == pytest.approx(L)


def test_mesh_is_aligned_with_damper():
    m = assemble(make_params(0.1, 0.1, 0.1, 0.4 * L, L, C), 12)
    assert m.n_elements == 15 and m.nodes[m.damper_node] == pytest.approx(0.4 * L)
    with pytest.raises(MeshError):
        assemble(make_params(0.1, 0.1, 0.1, 0.9, L, C), 2)
    with pytest.raises(MeshError):
        assemble(make_params(0.1, 0.1, 0.1, 0.41 * L, L, C), 20001)
    big = assemble(make_params(0.1, 0.1, 0.1, 0.41 * L, L, C), 19950)
    assert big.n_elements == 20000 and big.M.nnz == 3 * 20001 - 2
    with pytest.raises(MeshError):
        fem_eigenvalues(big)


def test_undamped_spectrum_converges():
    m = assemble(make_params(0, 0, 0, 0.9, L, C), 200)
    vals = fem_eigenvalues(m).values
    assert np.max(np.abs(vals.real)) < 1e-8 * np.max(np.abs(vals))
    low = np.sort(vals.imag[vals.imag > 1e-6])[:4]
    exact = math.pi * C / L * np.arange(1, 5)
    assert np.allclose(low, exact, rtol=1e-3)


def test_damped_spectrum_matches_analytic():
    p = make_params(0.3, 0.6, 0.4, 0.4 * L, L, C)
    fem = fem_eigenvalues(assemble(p, 200))
    spec = compute_spectrum(p, 4)
    rep = spurious_report(fem, spec)
    low = spec.eigenvalues()[np.abs(spec.eigenvalues()) < 10]
    for s in low:
        assert np.min(np.abs(fem.values - s)) < 2e-2 * max(1, abs(s))
    assert not rep.spurious and fem.max_real < 1e-9 * np.max(np.abs(fem.values))


def test_spurious_eigenvalue_grows_with_refinement():
    p = make_params(0.7, -1.5, 0.0, 0.9, L, C)
    spec = compute_spectrum(p, 200)
    assert all(abs(lad.re_line - C / (2 * L) * math.log(0.75 / 0.85)) < 1e-12 for lad in spec.ladders)
    tops = []
    for n in (20, 40, 80):
        rep = spurious_report(fem_eigenvalues(assemble(p, n)), spec)
        assert rep.spurious
        tops.append(max(v.real for v in rep.spurious))
    assert tops == sorted(tops) and tops[-1] > tops[0]
    assert "spurious" in rep.to_csv().splitlines()[0]


def test_energy_decays_with_dissipative_dampers():
    p = make_params(0.3, 0.6, 0.4, 0.9, L, C)
    m = assemble(p, 120)
    field = fem_time_response(m, InitialData.gaussian(0.1, 0.25 * L, 0.1), None, L / (120 * C), 3.0)
    E = np.array(field.meta["energy"])
    assert np.all(np.diff(E) <= 1e-12 * E[0]) and E[-1] < 0.5 * E[0]


def test_undamped_energy_is_conserved():
    m = assemble(make_params(0, 0, 0, 0.9, L, C), 60)
    field = fem_time_response(m, InitialData.gaussian(0.1, 0.25 * L, 0.1), None, 0.01, 2.0)
    E = np.array(field.meta["energy"])
    assert np.max(np.abs(E - E[0])) < 1e-10 * E[0]


def test_zero_data_stays_at_rest():
    m = assemble(make_params(0.3, 0.6, 0.4, 0.9, L, C), 20)
    field = fem_time_response(m, InitialData.zero(), Forcing.none(), 0.05, 1.0)
    assert np.all(field.u == 0)


def test_unstable_model_reports_failure():
    m = assemble(make_params(0.7, -1.5, 0.0, 0.9, L, C), 80)
    with pytest.raises(NumericalFailure):
        fem_time_response(m, InitialData.gaussian(0.1, 0.25 * L, 0.1), None, 1e-3, 60.0, save_every=1000)


def test_converges_to_modal_response():
    p = make_params(0.3, 0.99, 0.7, 0.5 * L, L, C)
    exp = build_expansion(p, 40)
    init = InitialData.gaussian(0.1, 0.25 * L, 0.1)
    T = 2 * L / C
    errs = []
    for n in (40, 80, 160):
        fem = fem_time_response(assemble(p, n), init, None, T / (10 * n), T, save_every=n // 4)
        ref = respond_modal(exp, init, None, Grid(fem.x, fem.t)).u
        errs.append(np.max(np.abs(ref - fem.u)))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 5e-3


def test_forced_rigid_motion():
    p = make_params(0, 0, 0, 0.9, L, C)
    push = Forcing.separable(lambda x: np.ones_like(x), g_terms=exp_poly_terms("constant", value=2.0))
    field = fem_time_response(assemble(p, 10), InitialData.zero(), push, 0.1, 1.0)
    assert np.allclose(field.u, field.t[:, None] ** 2, atol=1e-12)


def test_spectrum_csv():
    fem = fem_eigenvalues(assemble(make_params(0.3, 0.6, 0.4, 0.9, L, C), 4))
    rows = spectrum_csv(fem).strip().splitlines()
    assert rows[0] == "re,im,matched" and len(rows) == 1 + len(fem.values)


def test_energy_helper():
    m = assemble(make_params(0.3, 0.6, 0.4, 0.9, L, C), 4)
    assert fem_energy(m, np.ones(5), np.zeros(5)) == pytest.approx(0.0, abs=1e-12)
    assert fem_energy(m, np.zeros(5), np.ones(5)) == pytest.approx(0.5 * L)
