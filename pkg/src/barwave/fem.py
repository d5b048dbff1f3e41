"""Linear finite elements for the damped bar.

The semi-discrete system is ``M u'' + C u' + K u = M p`` (sparse matrices) with unit density
and the wave speed folded into the stiffness, so that only ``(h_i, c, L)``
enter, as in the analytic route.  The dashpots become three diagonal
entries of ``C``: ``c h1`` at the left node, ``c h2`` at the right node and
``2 c h3`` at the node carrying the internal damper.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshError, NumericalFailure
from .params import Params, rationalize_position
from .response import Forcing, InitialData, ResponseField
from .spectrum import Spectrum

MAX_ELEMENTS = 20000
MAX_EIG_ELEMENTS = 2000  # dense eigenvalue problem of size 2 (n + 1)


@dataclass
class FemModel:
    params: Params
    n_elements: int
    nodes: np.ndarray
    M: sp.csr_matrix
    C: sp.csr_matrix
    K: sp.csr_matrix
    damper_node: int
    lumped: bool = False

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def assemble(params: Params, n_elements: int, lumped: bool = False) -> FemModel:
    """Assemble mass, damping and stiffness on a uniform mesh.

    ``n_elements`` is raised to the next multiple of the denominator of
    ``a/L`` so that the internal damper sits on a node.

    Raises
    ------
    MeshError
        If ``a/L`` has no rational form with a usable denominator, or the
        adjusted mesh would exceed ``MAX_ELEMENTS``.
    """
    if n_elements < 4:
        raise MeshError(f"need at least 4 elements, got {n_elements}")
    L, c = params.L, params.c
    pos = rationalize_position(params.a, L, max(n_elements, 1000))
    if pos.residual > 1e-9:
        raise MeshError(f"damper position a/L={params.a / L} cannot be placed on a uniform mesh")
    n = int(math.ceil(n_elements / pos.p) * pos.p)
    if n > MAX_ELEMENTS:
        raise MeshError(f"mesh with the damper on a node needs {n} elements")
    he = L / n
    nodes = np.linspace(0.0, L, n + 1)
    diag = np.full(n + 1, 2.0)
    diag[[0, -1]] = 1.0
    off = np.ones(n)
    if lumped:
        M = sp.diags(diag * he / 2)
    else:
        M = sp.diags([off, 2 * diag, off], [-1, 0, 1]) * (he / 6)
    K = sp.diags([-off, diag, -off], [-1, 0, 1]) * (c ** 2 / he)
    j = n * pos.q // pos.p
    dash = np.zeros(n + 1)
    dash[0] += c * params.h1
    dash[n] += c * params.h2
    dash[j] += 2 * c * params.h3
    M, K, C = sp.csr_matrix(M), sp.csr_matrix(K), sp.csr_matrix(sp.diags(dash))
    return FemModel(params, n, nodes, M, C, K, j, lumped)


# -- spectrum ------------------------------------------------------------------

@dataclass
class FemSpectrum:
    values: np.ndarray
    n_elements: int
    condition: float

    @property
    def max_real(self) -> float:
        return float(np.max(self.values.real))


def fem_eigenvalues(model: FemModel) -> FemSpectrum:
    """Eigenvalues of the first-order form ``[[0, I], [-M^-1 K, -M^-1 C]]``.

    Raises
    ------
    MeshError
        Above ``MAX_EIG_ELEMENTS`` elements (the problem is solved densely).
    """
    if model.n_elements > MAX_EIG_ELEMENTS:
        raise MeshError(f"dense eigenvalue problem limited to {MAX_EIG_ELEMENTS} elements, "
                        f"got {model.n_elements}")
    m = model.n_nodes
    M = model.M.toarray()
    cond = float(np.linalg.cond(M))
    Minv_K = sla.solve(M, model.K.toarray(), assume_a="pos")
    Minv_C = sla.solve(M, model.C.toarray(), assume_a="pos")
    A = np.block([[np.zeros((m, m)), np.eye(m)], [-Minv_K, -Minv_C]])
    vals = sla.eigvals(A)
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure(f"eigenvalue computation failed (cond(M) = {cond:.3e})")
    order = np.lexsort((vals.real, vals.imag))
    return FemSpectrum(vals[order], model.n_elements, cond)


@dataclass
class SpuriousReport:
    radius: float
    matched: np.ndarray  # bool per FEM eigenvalue
    distance: np.ndarray
    fem: FemSpectrum
    spurious: List[complex] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "matched", "distance", "spurious"])
        sp = set(self.spurious)
        for v, ok, d in zip(self.fem.values, self.matched, self.distance):
            w.writerow([repr(float(v.real)), repr(float(v.imag)), int(ok), repr(float(d)),
                        int(complex(v) in sp)])
        return buf.getvalue()


def spurious_report(fem: FemSpectrum, spectrum: Spectrum,
                    radius: Optional[float] = None) -> SpuriousReport:
    """Pair FEM eigenvalues with analytic ones; unmatched ones with ``Re > 0`` are spurious.

    ``radius`` defaults to half the ladder spacing, ``p pi c / (2 L)``.  The
    origin always counts as an analytic eigenvalue (the rigid mode is a pole
    of the Green's function even when ``Delta_a(0) != 0``).  Real parts below
    ``1e-9`` times the largest FEM modulus count as zero.
    """
    p = spectrum.params
    if radius is None:
        radius = spectrum.position.p * math.pi * p.c / (2 * p.L)
    exact = np.concatenate([spectrum.eigenvalues(include_zero=True), [0j]])
    dist = np.min(np.abs(fem.values[:, None] - exact[None, :]), axis=1)
    matched = dist <= radius
    floor = 1e-9 * float(np.max(np.abs(fem.values), initial=1.0))
    spurious = [complex(v) for v, ok in zip(fem.values, matched) if not ok and v.real > floor]
    spurious.sort(key=lambda v: -v.real)
    return SpuriousReport(radius, matched, dist, fem, spurious)


def spectrum_csv(fem: FemSpectrum, matched: Optional[np.ndarray] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "matched"])
    flags = np.ones(len(fem.values), bool) if matched is None else matched
    for v, ok in zip(fem.values, flags):
        w.writerow([repr(float(v.real)), repr(float(v.imag)), int(ok)])
    return buf.getvalue()


# -- time stepping ---------------------------------------------------------------

def fem_energy(model: FemModel, u: np.ndarray, v: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return 0.5 * float(v @ (model.M @ v) + u @ (model.K @ u))


def fem_time_response(model: FemModel, initial: InitialData, forcing: Optional[Forcing],
                      dt: float, T: float, save_every: int = 1) -> ResponseField:
    """Trapezoidal (average-acceleration) integration from nodal initial data.

    Raises
    ------
    NumericalFailure
        When the state stops being finite (for instance an unstable
        spurious mode with active dashpots).
    """
    if dt <= 0 or T < 0:
        raise ValueError("dt must be positive and T non-negative")
    forcing = forcing or Forcing.none()
    M, C, K = model.M, model.C, model.K
    x = model.nodes
    steps = int(math.ceil(T / dt - 1e-9))
    dt = T / steps if steps else dt
    u = initial.displacement(x).astype(float)
    v = initial.velocity(x).astype(float)
    lhs = spla.splu(sp.csc_matrix(M + 0.5 * dt * C + 0.25 * dt ** 2 * K))
    rhs_v = sp.csr_matrix(M - 0.5 * dt * C - 0.25 * dt ** 2 * K)
    load = (lambda tt: M @ forcing.value(x, tt)) if not forcing.is_zero else None
    ts, us, energy = [0.0], [u.copy()], [fem_energy(model, u, v)]
    f0 = load(0.0) if load else None
    with np.errstate(over="ignore", invalid="ignore"):  # blow-up is reported below
        for k in range(1, steps + 1):
            rhs = rhs_v @ v - dt * (K @ u)
            if load:
                f1 = load(k * dt)
                rhs = rhs + 0.5 * dt * (f0 + f1)
                f0 = f1
            v_new = lhs.solve(rhs)
            u = u + 0.5 * dt * (v + v_new)
            v = v_new
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise NumericalFailure(f"FEM state became non-finite at t={k * dt:.4g}")
            if k % save_every == 0 or k == steps:
                ts.append(k * dt)
                us.append(u.copy())
                energy.append(fem_energy(model, u, v))
    meta = {"route": "fem", "n_elements": model.n_elements, "dt": dt, "lumped": model.lumped,
            "energy": energy}
    return ResponseField(x.copy(), np.array(ts), np.array(us), meta)
