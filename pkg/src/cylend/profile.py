"""Warped-product end ``dr^2 + F(r) dy^2`` and transverse-mode facts.

``F`` equals the funnel profile ``cosh(r)^2`` on ``[0, r0]``, the constant
``(2 pi)^2`` on ``[R, inf)``, and a quintic Hermite blend in between.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ProfileError

FLAT = (2.0 * math.pi) ** 2
DEFAULT_R0 = 1.0
DEFAULT_R = 3.0
MONOTONE_GRID = 10_000


def _quintic_hermite(r0, R, left, right):
    """Coefficients (in ``t = (r - r0) / (R - r0)``) for value/1st/2nd-derivative data."""
    h = R - r0
    f0, d0, s0 = left[0], left[1] * h, left[2] * h * h
    f1, d1, s1 = right[0], right[1] * h, right[2] * h * h
    # standard quintic Hermite basis
    c0 = f0
    c1 = d0
    c2 = s0 / 2.0
    c3 = 10 * (f1 - f0) - 6 * d0 - 4 * d1 - 1.5 * s0 + 0.5 * s1
    c4 = -15 * (f1 - f0) + 8 * d0 + 7 * d1 + 1.5 * s0 - s1
    c5 = 6 * (f1 - f0) - 3 * d0 - 3 * d1 - 0.5 * s0 + 0.5 * s1
    return np.array([c0, c1, c2, c3, c4, c5])


@dataclass(frozen=True)
class EndProfile:
    r0: float
    R: float
    ell: float

    def __post_init__(self):
        if not 0.0 < self.r0 < self.R:
            raise ProfileError("need 0 < r0 < R")
        if not math.cosh(self.r0) ** 2 < FLAT:
            raise ProfileError("need cosh(r0)^2 < (2 pi)^2, i.e. r0 < arcosh(2 pi)")
        if not self.ell > 0:
            raise DomainError("ell must be positive")
        object.__setattr__(self, "_coef", _quintic_hermite(
            self.r0,
            self.R,
            (math.cosh(self.r0) ** 2, math.sinh(2 * self.r0), 2 * math.cosh(2 * self.r0)),
            (FLAT, 0.0, 0.0),
        ))

    def _blend(self, r, nu):
        c = self._coef
        h = self.R - self.r0
        t = (r - self.r0) / h
        poly = np.polynomial.polynomial.Polynomial(c)
        return poly.deriv(nu)(t) / h**nu if nu else poly(t)

    def _eval(self, r, nu):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("profile defined for r >= 0")
        inner = [np.cosh(r) ** 2, np.sinh(2 * r), 2 * np.cosh(2 * r)][nu]
        outer = FLAT if nu == 0 else 0.0
        out = np.where(r <= self.r0, inner, np.where(r >= self.R, outer, self._blend(r, nu)))
        return float(out) if out.ndim == 0 else out

    def F(self, r):
        return self._eval(r, 0)

    def F_prime(self, r):
        return self._eval(r, 1)

    def F_second(self, r):
        return self._eval(r, 2)

    def sqrt_F(self, r):
        return np.sqrt(self.F(r))

    def check_monotone(self, n: int = MONOTONE_GRID) -> float:
        """Minimum of ``F'`` on an interior grid of ``(0, R)``; raises if not positive."""
        r = np.linspace(0.0, self.R, n + 2)[1:-1]
        m = float(np.min(self.F_prime(r)))
        if m <= 0.0:
            raise ProfileError(
                f"blend is not increasing (min F' = {m:.3e}); move r0 down or R up"
            )
        return m


def make_profile(r0: float = DEFAULT_R0, R: float = DEFAULT_R, ell: float = 1.0) -> EndProfile:
    prof = EndProfile(float(r0), float(R), float(ell))
    prof.check_monotone()
    return prof


@dataclass(frozen=True)
class FlatProfile:
    """Constant ``F = (2 pi)^2`` on the whole end; used for the separable oracle."""

    ell: float
    r0: float = 0.0
    R: float = 0.0

    def F(self, r):
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, FLAT)
        return float(out) if out.ndim == 0 else out

    def F_prime(self, r):
        return 0.0 * np.asarray(r, dtype=float)

    def sqrt_F(self, r):
        return np.sqrt(self.F(r))


def mode_threshold(n: int, ell: float) -> float:
    """Cutoff energy ``n^2 / ell^2`` of the n-th transverse Fourier mode."""
    if n < 0:
        raise DomainError("mode index must be >= 0")
    return n * n / ell**2


def decay_rate(lam: float, n: int, ell: float) -> float:
    """Decay rate of a mode-``n`` solution at energy ``lam`` below its cutoff."""
    thr = mode_threshold(n, ell)
    if lam >= thr:
        raise DomainError(f"lambda = {lam} is not below the mode-{n} threshold {thr}")
    rate = math.sqrt(thr - lam)
    if rate < 0.1:
        warnings.warn(f"decay rate {rate:.3g} < 0.1: truncation of the end is unreliable", RuntimeWarning)
    return rate


def truncation_length(lam: float, ell: float, R: float, tol: float = 1e-8) -> float:
    """``L`` such that ``exp(-2 rate (L - R)) < tol``."""
    rate = decay_rate(lam, 1, ell)
    return R + math.log(1.0 / tol) / (2.0 * rate)
