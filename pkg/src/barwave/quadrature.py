"""Composite Gauss-Legendre rules and a small thread pool helper."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np


@lru_cache(maxsize=32)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def split_points(lo: float, hi: float, breaks: Iterable[float] = ()) -> np.ndarray:
    """Sorted piece boundaries of ``[lo, hi]`` including interior ``breaks``."""
    inner = [b for b in breaks if lo < b < hi]
    pts = np.unique(np.concatenate([[lo, hi], np.asarray(inner, float)]))
    # drop slivers that only carry rounding noise
    keep = np.concatenate([[True], np.diff(pts) > 1e-14 * max(1.0, hi - lo)])
    return pts[keep]


def gauss_panels(lo: float, hi: float, breaks: Iterable[float] = (), panels: int = 4,
                 order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[lo, hi]``.

    Each piece between consecutive ``breaks`` is cut into ``panels``
    equal panels carrying an ``order``-point rule.
    """
    if hi <= lo:
        return np.empty(0), np.empty(0)
    g, w = _leggauss(order)
    pts = split_points(lo, hi, breaks)
    edges = np.concatenate([np.linspace(p0, p1, panels + 1)[:-1] for p0, p1 in zip(pts[:-1], pts[1:])]
                           + [[hi]])
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    nodes = (0.5 * (left + right))[:, None] + half[:, None] * g[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def adaptive_rule(integrand: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                  breaks: Sequence[float] = (), rtol: float = 1e-11, order: int = 16,
                  panels: int = 2, max_panels: int = 1024):
    """Refine a composite rule until the integral of ``integrand`` settles.

    ``integrand`` maps nodes of shape ``(n,)`` to values of shape ``(..., n)``
    (vector-valued integrands are compared in max-norm).  Returns the final
    nodes and weights so callers can reuse them.
    """
    nodes, weights = gauss_panels(lo, hi, breaks, panels, order)
    prev = integrand(nodes) @ weights
    while panels < max_panels:
        panels *= 2
        n2, w2 = gauss_panels(lo, hi, breaks, panels, order)
        cur = integrand(n2) @ w2
        err = np.max(np.abs(cur - prev))
        scale = max(np.max(np.abs(cur)), 1e-300)
        nodes, weights = n2, w2
        if err <= rtol * scale:
            break
        prev = cur
    return nodes, weights


def thread_count() -> int:
    """Worker cap from ``BARWAVE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("BARWAVE_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Sequence) -> list:
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
