"""Figures written next to the CLI tables (non-interactive Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_spectrum(values: np.ndarray, path, title: str = "", re_lines: Sequence[float] = ()) -> Path:
    """Eigenvalues in the complex plane with their vertical lines."""
    fig, ax = plt.subplots(figsize=(5, 6))
    for r in re_lines:
        ax.axvline(r, color="0.85", lw=0.8, zorder=0)
    ax.scatter(values.real, values.imag, s=6, color="tab:blue")
    ax.axvline(0.0, color="k", lw=0.6)
    ax.set_xlabel("Re s")
    ax.set_ylabel("Im s")
    ax.set_title(title)
    return _save(fig, path)


def plot_response(field, path, title: str = "") -> Path:
    """Displacement ``u(x, t)`` as a colour map over the space-time grid."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    lim = float(np.max(np.abs(field.u), initial=1e-300))
    mesh = ax.pcolormesh(field.x, field.t, field.u, shading="auto", cmap="RdBu_r", vmin=-lim, vmax=lim)
    fig.colorbar(mesh, ax=ax, label="u")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title)
    return _save(fig, path)


def plot_snapshots(field, path, count: int = 6, title: str = "") -> Path:
    """Profiles ``u(., t)`` at a few evenly spaced times."""
    fig, ax = plt.subplots(figsize=(6, 4))
    idx = np.unique(np.linspace(0, len(field.t) - 1, count).round().astype(int))
    for i in idx:
        ax.plot(field.x, field.u[i], lw=1, label=f"t={field.t[i]:.3g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=7)
    ax.set_title(title)
    return _save(fig, path)


def plot_comparison(x, t, analytic: np.ndarray, fem: np.ndarray, path, title: str = "") -> Path:
    """Analytic and FEM profiles overlaid at a few times, with the pointwise error below."""
    fig, (ax, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    for i in np.unique(np.linspace(0, len(t) - 1, 4).round().astype(int)):
        line, = ax.plot(x, analytic[i], lw=1, label=f"t={t[i]:.3g}")
        ax.plot(x, fem[i], "--", lw=1, color=line.get_color())
    ax.set_ylabel("u (solid analytic, dashed FEM)")
    ax.legend(fontsize=7)
    ax2.plot(x, np.max(np.abs(analytic - fem), axis=0), color="k", lw=1)
    ax2.set_xlabel("x")
    ax2.set_ylabel("max over t of |difference|")
    ax.set_title(title)
    return _save(fig, path)


def plot_fem_spectrum(values: np.ndarray, path, analytic: Optional[np.ndarray] = None,
                      spurious: Sequence[complex] = (), title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 6))
    ax.scatter(values.real, values.imag, s=6, label="FEM")
    if analytic is not None and len(analytic):
        ax.scatter(analytic.real, analytic.imag, s=10, marker="x", label="analytic")
    if len(spurious):
        sp = np.asarray(spurious)
        ax.scatter(sp.real, sp.imag, s=40, facecolors="none", edgecolors="r", label="spurious")
    ax.axvline(0.0, color="k", lw=0.6)
    ax.set_xlabel("Re s")
    ax.set_ylabel("Im s")
    ax.legend(fontsize=7)
    ax.set_title(title)
    return _save(fig, path)
