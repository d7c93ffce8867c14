"""Composite Gauss-Legendre quadrature with panel doubling."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import NumericInstabilityError


@lru_cache(maxsize=16)
def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def nodes(a: float, b: float, panels: int, order: int = 8):
    """Nodes and weights of the composite rule on [a, b]."""
    x, w = _gl(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def integrate(f, a: float, b: float, panels: int, order: int = 8) -> float:
    if b <= a:
        return 0.0
    pts, wts = nodes(a, b, panels, order)
    return math.fsum(wts * f(pts))


def integrate_doubling(f, a: float, b: float, panels: int, rtol: float = 1e-10,
                       fail_rtol: float = 1e-2, max_doublings: int = 8, order: int = 8,
                       atol: float = 0.0) -> tuple[float, float]:
    """Double the panel count until successive estimates agree to ``rtol``.

    Returns ``(value, last_relative_change)``.  Raises if the last change is
    still above ``fail_rtol`` when the doubling budget runs out.
    """
    if b <= a:
        return 0.0, 0.0
    panels = max(1, int(panels))
    prev = integrate(f, a, b, panels, order)
    change = math.inf
    for _ in range(max_doublings):
        panels *= 2
        cur = integrate(f, a, b, panels, order)
        diff = abs(cur - prev)
        scale = max(abs(cur), abs(prev))
        change = diff / scale if scale > 0 else 0.0
        prev = cur
        if change <= rtol or diff <= atol:
            return cur, change
    if change > fail_rtol:
        raise NumericInstabilityError(f"quadrature did not converge: last relative change {change:.3e}")
    return prev, change
