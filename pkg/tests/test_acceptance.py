"""Acceptance checks, one per criterion.

Each check prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the
measured quantity.  Run with ``pytest -s tests/test_acceptance.py`` (or
``python3 tests/test_acceptance.py``) to see the lines.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from barwave.cli import solve, solve_fem
from barwave.critical import both_transparent_kernel, respond_both_transparent, respond_critical
from barwave.fem import assemble, fem_eigenvalues, spurious_report
from barwave.green import (build_expansion, green_laplace, green_numerator, residue_coefficient,
                           residue_coefficient_from_derivative)
from barwave.modes import ModeBasis
from barwave.params import make_params, rationalize_position, snap_position
from barwave.response import (Forcing, Grid, InitialData, ModalKernel, exp_poly_terms, make_grid,
                              respond_kernel, respond_modal)
from barwave.scenario import load_scenario
from barwave.spectrum import (build_char_poly, cluster_lines, compute_spectrum, eigenvalues_no_internal,
                              find_roots, midpoint_roots)

L, C = 1.8, 1.5
SCEN = Path(__file__).resolve().parents[1] / "scenarios"


def _report(n: int, ok: bool, detail: str) -> bool:
    line = f"ACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return ok


def _relative_residual(basis: ModeBasis, s: np.ndarray) -> np.ndarray:
    """``|Delta_a(s)|`` divided by the sum of its exponential term magnitudes."""
    mant, _ = basis.delta_a_scaled(s)
    coeffs, exps = basis._delta_a_terms(s)
    shift = np.max(np.stack([e.real for e in exps]), axis=0)
    local = 0.5 * sum(abs(k) * np.exp(e.real - shift) for k, e in zip(coeffs, exps))
    return np.abs(mant) / local


def _random_damping(rng, size):
    out = []
    while len(out) < size:
        h = rng.uniform(-3, 3)
        if abs(abs(h) - 1) >= 0.05:
            out.append(h)
    return out


def criterion_1() -> bool:
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, count = 0.0, 0
    for _ in range(25):
        h1, h2, h3 = _random_damping(rng, 3)
        p = int(rng.integers(2, 13))
        q = int(rng.integers(1, p))
        spec = compute_spectrum(make_params(h1, h2, h3, L * q / p, L, C), (-50, 50))
        s = spec.eigenvalues()
        worst = max(worst, float(np.max(_relative_residual(ModeBasis(spec.params), s))))
        count += len(s)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 10
    return _report(1, ok, f"max |Delta_a|/scale = {worst:.2e} over {count} eigenvalues, {elapsed:.2f} s")


def criterion_2() -> bool:
    worst_ladder = 0.0
    for h1, h2, ratio in ((0.7, -1.5, 0.4), (0.3, 0.2, 0.3), (-0.4, 2.5, 0.41), (2.2, 0.6, 0.5)):
        p = make_params(h1, h2, 0.0, ratio * L, L, C)
        spec = compute_spectrum(p, 10)
        top = int(np.max(np.abs(spec.eigenvalues().imag)) * L / (math.pi * C)) + 2
        ref = eigenvalues_no_internal(p, top).s
        for v in spec.eigenvalues():
            worst_ladder = max(worst_ladder, float(np.min(np.abs(ref - v)) / abs(v)))
    worst_mid = 0.0
    for h in ((0, 0, 0.5), (0.3, 0.6, -0.4), (0.2, 0.9, 2.0), (0.2, 2.0, 0.5), (3 / 10, 10 / 3, -109 / 60)):
        p = make_params(*h, 0.5 * L, L, C)
        _, explicit = midpoint_roots(p)
        pos = rationalize_position(p.a, L)
        found = find_roots(build_char_poly(snap_position(p, pos), pos)).roots
        for z in explicit.roots:
            worst_mid = max(worst_mid, float(np.min(np.abs(found - z)) / abs(z)))
    ok = worst_ladder <= 1e-12 and worst_mid <= 1e-12
    return _report(2, ok, f"h3=0 ladder rel diff {worst_ladder:.1e}, midpoint roots rel diff {worst_mid:.1e}")


def criterion_3() -> bool:
    rng = np.random.default_rng(7)
    worst_res, worst_const, checked = 0.0, 0.0, 0
    for h in ((0.4, -0.3, 0.6), (0.3, 0.9, 0.7), (0.7, -1.5, 0.0), (2.0, 0.2, -0.4)):
        spec = compute_spectrum(make_params(*h, 0.4 * L, L, C), 12)
        b = ModeBasis(spec.params)
        s_all = spec.eigenvalues(include_zero=False)
        for s_n in s_all[np.argsort(np.abs(s_all))][:12]:
            A = residue_coefficient(s_n, b)
            x, xi = rng.uniform(0, L, 2)
            radius = 1e-3 * C / L
            theta = 2 * np.pi * np.arange(64) / 64
            w = radius * np.exp(1j * theta)
            z = s_n + w
            vals = C * green_numerator(x, xi, z, b) / (z * b.delta_a(z))
            limit = np.mean(vals * w)  # (s - s_n) G(s) as s -> s_n
            expected = b.phi_a(x, s_n) * b.phi_a(xi, s_n) / A
            worst_res = max(worst_res, float(abs(limit - expected) / abs(expected)))
            pairs = rng.uniform(0, L, (5, 2))
            vals = np.array([residue_coefficient_from_derivative(s_n, px, pxi, b) for px, pxi in pairs])
            worst_const = max(worst_const, float(np.max(np.abs(vals - vals[0])) / abs(vals[0])))
            checked += 1
    ok = worst_res <= 1e-6 and worst_const <= 1e-8
    return _report(3, ok, f"{checked} eigenvalues: residue rel err {worst_res:.1e}, "
                          f"derivative form spread {worst_const:.1e}")


def criterion_4() -> bool:
    rng = np.random.default_rng(11)
    p = make_params(0.4, -0.3, 0.6, 0.4 * L, L, C)
    b = ModeBasis(p)
    s = 0.4 + 2.3j
    sym = 0.0
    for _ in range(50):
        x, xi = rng.uniform(0, L, 2)
        g = green_laplace(x, xi, s, b)
        sym = max(sym, float(abs(g - green_laplace(xi, x, s, b)) / abs(g)))
    h = 1e-6 * L
    g = lambda y, xi: complex(green_laplace(y, xi, s, b))
    right = lambda y, xi: (-3 * g(y, xi) + 4 * g(y + h, xi) - g(y + 2 * h, xi)) / (2 * h)
    left = lambda y, xi: (3 * g(y, xi) - 4 * g(y - h, xi) + g(y - 2 * h, xi)) / (2 * h)
    jump_src = max(abs(right(xi, xi) - left(xi, xi) + 1.0) for xi in (0.3, 1.2))
    a = p.a
    jump_damp = max(abs(right(a, xi) - left(a, xi) - 2 * p.h3 * s / C * g(a, xi)) for xi in (0.3, 1.4))
    ok = sym <= 1e-12 and jump_src <= 1e-6 and jump_damp <= 1e-6
    return _report(4, ok, f"symmetry {sym:.1e}, source jump err {jump_src:.1e}, damper jump err {jump_damp:.1e}")


def criterion_5() -> bool:
    start = time.perf_counter()
    scn = load_scenario(SCEN / "near_transparent.json")
    T = 2 * L / C
    model = assemble(scn.params, 160)
    from barwave.fem import fem_time_response
    fem = fem_time_response(model, scn.initial, None, T / 1600, T, save_every=4)
    analytic = respond_modal(build_expansion(scn.params, 40), scn.initial, None, Grid(fem.x, fem.t))
    diff = float(np.max(np.abs(analytic.u - fem.u)))
    elapsed = time.perf_counter() - start
    ok = diff <= 5e-3 and elapsed < 60
    return _report(5, ok, f"max |analytic - FEM| = {diff:.2e} on {fem.u.shape[0]}x{fem.u.shape[1]} samples, "
                          f"{elapsed:.1f} s")


def criterion_6() -> bool:
    scn = load_scenario(SCEN / "zero_damping.json")
    spec = compute_spectrum(scn.params, 40)
    max_re = float(np.max(np.abs(spec.eigenvalues().real)))
    period = 2 * L / C
    t = np.linspace(0, 5 * period, 1001)
    field = solve(scn, Grid(np.array([L / 9]), t), mode="modal")
    u = field.u[:, 0]
    lag = int(round(period / (t[1] - t[0])))
    a, b = u[:-lag], u[lag:]
    corr = float(np.dot(a - a.mean(), b - b.mean()) / (np.linalg.norm(a - a.mean()) * np.linalg.norm(b - b.mean())))
    ok = max_re < 1e-9 and corr >= 0.99 and u.std() > 1e-3
    return _report(6, ok, f"max |Re s| = {max_re:.1e}, autocorrelation at lag 2L/c = {corr:.6f} "
                          f"(signal std {u.std():.2e})")


def criterion_7() -> bool:
    scn = load_scenario(SCEN / "right_transparent.json")
    T = 2 * L / C
    t = np.concatenate([np.linspace(0, T, 41), T + np.linspace(1e-3, 2.0, 40)])
    field = respond_critical(scn.params, scn.initial, None, Grid(np.linspace(0, L, 91), t))
    late = field.u[t > T]
    ut = np.diff(late, axis=0) / np.diff(t[t > T])[:, None]
    worst = float(np.max(np.abs(ut)))
    moving = float(np.max(np.abs(np.diff(field.u[t < T], axis=0))))
    ok = worst < 1e-8 and moving > 1e-3
    return _report(7, ok, f"max |u_t| for t > 2L/c = {worst:.1e} (motion before: {moving:.1e})")


def criterion_8() -> bool:
    p = make_params(0.7, -1.5, 0.0, 0.5 * L, L, C)
    spec = compute_spectrum(p, 400)
    lines = cluster_lines([lad.re_line for lad in spec.ladders])
    expected = C / (2 * L) * math.log(0.75 / 0.85)
    tops = []
    for n in (20, 40, 80, 160):
        rep = spurious_report(fem_eigenvalues(assemble(p, n)), spec)
        tops.append(max((v.real for v in rep.spurious), default=float("nan")))
    ok = (len(lines) == 1 and abs(lines[0] - expected) < 1e-12 and abs(lines[0] + 0.0522) < 1e-4
          and all(np.isfinite(tops)) and all(x > 0 for x in tops)
          and all(b >= a for a, b in zip(tops, tops[1:])))
    return _report(8, ok, f"analytic Re line {lines[0]:.6f}; spurious Re at n=20/40/80/160: "
                          + ", ".join(f"{v:.1f}" for v in tops))


def criterion_9() -> bool:
    p = make_params(0.4, -0.3, 0.6, 0.4 * L, L, C)
    exp = build_expansion(p, 12)
    grid = Grid(np.linspace(0, L, 9), np.linspace(0, 2 * L / C, 7))
    init = InitialData.gaussians([(0.1, 0.25 * L, 0.1)], velocity=lambda x: 0.1 * np.sin(3 * x))
    force = Forcing.separable(lambda x: np.exp(-(x - 1.0) ** 2 / 0.05),
                              g_terms=exp_poly_terms("sinusoid", amplitude=0.5, omega=2.0))
    a = respond_modal(exp, init, force, grid).u
    b = respond_kernel(ModalKernel(exp), init, force, exp.params, grid).u
    modal_kernel = float(np.linalg.norm(a - b) / np.linalg.norm(a))
    q = make_params(1.0, 1.0, 0.5, 0.5 * L, L, C)
    init2 = InitialData.gaussians([(0.1, 0.25 * L, 0.1), (0.1, 0.75 * L, 0.1)],
                                  velocity=lambda x: 0.05 * np.cos(2 * x))
    grid2 = make_grid(q, 31, 25)
    e = respond_both_transparent(init2, force, q, grid2).u
    k = respond_kernel(both_transparent_kernel(q), init2, force, q, grid2).u
    explicit_kernel = float(np.max(np.abs(e - k)))
    ok = modal_kernel <= 1e-3 and explicit_kernel <= 1e-10
    return _report(9, ok, f"modal vs kernel rel L2 {modal_kernel:.1e}; explicit vs kernel {explicit_kernel:.1e}")


def criterion_10() -> bool:
    counts = []
    for name, bound in (("fig_spectrum_a2_5", 5), ("fig_spectrum_a41_100", 100)):
        scn = load_scenario(SCEN / f"{name}.json")
        spec = compute_spectrum(scn.params, 3)
        counts.append((len(cluster_lines([lad.re_line for lad in spec.ladders])), bound, spec.position.p))
    ok = all(n <= b for n, b, _ in counts) and [p for *_, p in counts] == [5, 100]
    return _report(10, ok, ", ".join(f"a/L denominator {p}: {n} lines (<= {b})" for n, b, p in counts))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(check, capsys):
    with capsys.disabled():
        assert check()


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    sys.exit(0 if all(results) else 1)
