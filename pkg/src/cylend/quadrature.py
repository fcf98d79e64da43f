"""Tensor Gauss-Legendre quadrature on a disk in polar coordinates."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import AccuracyError


@lru_cache(maxsize=None)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def polar_nodes(radius: float, n_r: int, n_theta: int):
    """Nodes (x, y) and weights (including the Jacobian r) on the disk of given radius."""
    xr, wr = _leggauss(n_r)
    xt, wt = _leggauss(n_theta)
    r = 0.5 * radius * (xr + 1.0)
    wr = 0.5 * radius * wr * r
    th = math.pi * (xt + 1.0)
    wt = math.pi * wt
    R, T = np.meshgrid(r, th, indexing="ij")
    W = np.outer(wr, wt)
    return (R * np.cos(T)).ravel(), (R * np.sin(T)).ravel(), W.ravel()


def polar_integrate(f, radius: float, n_r: int, n_theta: int):
    """Integrate ``f(x, y)`` (array-valued allowed, last axis = nodes)."""
    x, y, w = polar_nodes(radius, n_r, n_theta)
    return np.asarray(f(x, y)) @ w


def adaptive_polar(f, radius: float, rtol: float = 1e-10, n_start: int = 16, n_max: int = 1024):
    """Double both orders until successive estimates agree to ``rtol``.

    Returns ``(value, relative_error_estimate)``; raises :class:`AccuracyError`
    with the best estimate if ``n_max`` is reached first.
    """
    n = n_start
    prev = polar_integrate(f, radius, n, n)
    while True:
        n *= 2
        cur = polar_integrate(f, radius, n, n)
        scale = np.max(np.abs(cur))
        err = float(np.max(np.abs(cur - prev)) / scale) if scale > 0 else 0.0
        if err < rtol:
            return cur, err
        if n >= n_max:
            raise AccuracyError(f"polar quadrature did not converge (rel. change {err:.2e})", best=cur, error=err)
        prev = cur
