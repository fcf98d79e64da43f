"""Rayleigh-quotient certificate for an odd eigenvalue below the end threshold.

A nonzero odd test function supported in the ball ``|z| < sqrt(2) - 1`` whose
hyperbolic Rayleigh quotient is below ``1 / ell**2`` forces an eigenvalue of
the odd-sector Laplacian below its essential spectrum.  In two dimensions the
Dirichlet energy is conformally invariant, so the numerator is computed with
the flat metric; only the L2 norm carries the weight ``4 / (1 - |z|^2)^2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_triangular

from . import hyperbolic
from .errors import CertificateInfeasibleError, DegenerateInputError, DependentFamilyError, DomainError
from .quadrature import adaptive_polar

BALL_RADIUS = math.sqrt(2.0) - 1.0
QUAD_RTOL = 1e-10
BISECT_TOL = 1e-12


def hyperbolic_weight(x, y):
    return 4.0 / (1.0 - x * x - y * y) ** 2


@dataclass(frozen=True)
class TestFunction:
    """Odd, compactly supported function on the ball ``B``.

    ``value(x, y)`` and ``gradient(x, y) -> (gx, gy)`` act on arrays; both
    return zero outside ``B``.
    """

    __test__ = False  # not a pytest class

    value: Callable = field(repr=False)
    gradient: Callable = field(repr=False)
    k: int = 1
    p: int = 3
    scale: float = 1.0
    label: str = "im_zk"
    support_radius: float = BALL_RADIUS

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.value(z.real, z.imag)

    def scaled(self, c: float) -> "TestFunction":
        v, g = self.value, self.gradient

        def value(x, y):
            return c * v(x, y)

        def gradient(x, y):
            gx, gy = g(x, y)
            return c * gx, c * gy

        return TestFunction(value, gradient, self.k, self.p, self.scale * c, self.label, self.support_radius)


def im_zk(k: int = 1, p: int = 3) -> TestFunction:
    """``Im(z^k) * (1 - |z|^2 / beta^2)^p`` on ``|z| < beta = sqrt(2) - 1``."""
    if k < 1 or p < 2:
        raise DomainError("need k >= 1 and p >= 2")
    b2 = BALL_RADIUS**2

    def value(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        z = x + 1j * y
        t = np.clip(1.0 - (x * x + y * y) / b2, 0.0, None)
        return np.imag(z**k) * t**p

    def gradient(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        z = x + 1j * y
        t = np.clip(1.0 - (x * x + y * y) / b2, 0.0, None)
        s = np.imag(z**k)
        fp = k * z ** (k - 1)
        # Cauchy-Riemann: grad Im f = (Im f', Re f')
        sx, sy = np.imag(fp), np.real(fp)
        bump = t**p
        dbump = -p / b2 * t ** (p - 1) * 2.0  # d bump / d(r^2) times 2, chain rule below
        return sx * bump + s * dbump * x, sy * bump + s * dbump * y

    return TestFunction(value, gradient, k=k, p=p, label=f"im_zk(k={k},p={p})")


def tabulated(k: int, radii: Sequence[float], samples: Sequence[float]) -> TestFunction:
    """``Im(z^k) * g(|z|)`` with ``g`` a clamped cubic spline through the samples.

    The last radius must be the ball radius and its sample zero.
    """
    radii = np.asarray(radii, float)
    samples = np.asarray(samples, float)
    if radii.ndim != 1 or radii.shape != samples.shape or len(radii) < 3:
        raise DomainError("tabulated profile needs matching 1-d arrays of length >= 3")
    if abs(radii[0]) > 1e-14 or abs(radii[-1] - BALL_RADIUS) > 1e-12 or abs(samples[-1]) > 1e-14:
        raise DomainError("tabulated profile must span [0, sqrt(2)-1] and vanish at the edge")
    g = CubicSpline(radii, samples, bc_type=((1, 0.0), (1, 0.0)))
    dg = g.derivative()

    def value(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        r = np.hypot(x, y)
        inside = r < BALL_RADIUS
        return np.where(inside, np.imag((x + 1j * y) ** k) * g(np.minimum(r, BALL_RADIUS)), 0.0)

    def gradient(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        z = x + 1j * y
        r = np.hypot(x, y)
        inside = r < BALL_RADIUS
        rc = np.minimum(r, BALL_RADIUS)
        s = np.imag(z**k)
        fp = k * z ** (k - 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            q = np.where(r > 0, dg(rc) / np.where(r > 0, r, 1.0), g(rc, 2))
        gx = np.imag(fp) * g(rc) + s * q * x
        gy = np.real(fp) * g(rc) + s * q * y
        return np.where(inside, gx, 0.0), np.where(inside, gy, 0.0)

    return TestFunction(value, gradient, k=k, p=0, label=f"tabulated(k={k},n={len(radii)})")


# ---------------------------------------------------------------------------
# Integrals
# ---------------------------------------------------------------------------


def _integrate(f):
    return adaptive_polar(f, BALL_RADIUS, rtol=QUAD_RTOL)


def dirichlet_energy(phi: TestFunction, with_error: bool = False):
    def f(x, y):
        gx, gy = phi.gradient(x, y)
        return gx * gx + gy * gy

    val, err = _integrate(f)
    return (float(val), err) if with_error else float(val)


def weighted_l2(phi: TestFunction, with_error: bool = False):
    def f(x, y):
        v = phi.value(x, y)
        return v * v * hyperbolic_weight(x, y)

    val, err = _integrate(f)
    return (float(val), err) if with_error else float(val)


def gram_matrices(phis: Sequence[TestFunction]):
    """Stiffness and weighted mass Gram matrices of a family of test functions."""
    m = len(phis)
    iu = np.triu_indices(m)

    def f(x, y):
        vals = np.array([p.value(x, y) for p in phis])
        grads = [p.gradient(x, y) for p in phis]
        gx = np.array([g[0] for g in grads])
        gy = np.array([g[1] for g in grads])
        w = hyperbolic_weight(x, y)
        A = gx[iu[0]] * gx[iu[1]] + gy[iu[0]] * gy[iu[1]]
        M = vals[iu[0]] * vals[iu[1]] * w
        return np.concatenate([A, M])

    val, err = _integrate(f)
    nt = len(iu[0])
    A = np.zeros((m, m))
    M = np.zeros((m, m))
    A[iu] = val[:nt]
    M[iu] = val[nt:]
    A = A + np.triu(A, 1).T
    M = M + np.triu(M, 1).T
    return A, M, err


# ---------------------------------------------------------------------------
# Certificate
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    genus: int
    alpha: float
    alpha_prime: float
    dirichlet_energy: float
    weighted_l2: float
    rayleigh: float
    ell: float
    threshold: float
    holds: bool
    equivalent_form_value: float | None
    quadrature_error_estimate: float
    test_function: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def equivalent_form(alpha: float, energy: float, l2: float) -> float:
    """``tan(alpha)^2 * cosh(||phi|| / (4 ||d phi||))``; exceeds 1 iff the certificate holds (genus 1)."""
    return math.tan(alpha) ** 2 * math.cosh(math.sqrt(l2) / (4.0 * math.sqrt(energy)))


def check_condition(phi: TestFunction, genus: int, alpha: float, alpha_prime: float | None = None) -> CertificateReport:
    geo = hyperbolic.make_geometry(genus, alpha, alpha_prime)
    E, eE = dirichlet_energy(phi, with_error=True)
    W, eW = weighted_l2(phi, with_error=True)
    if W == 0.0 or E == 0.0:
        raise DegenerateInputError("test function vanishes identically")
    return _report(phi.label, geo, E, W, max(eE, eW))


def _report(label, geo, E, W, qerr) -> CertificateReport:
    rayleigh = E / W
    threshold = 1.0 / geo.ell**2
    holds = rayleigh < threshold
    eq = None
    if geo.genus == 1 and geo.symmetric:
        eq = equivalent_form(geo.alpha, E, W)
        if (eq > 1.0) != holds:
            raise AssertionError("criterion forms disagree; quadrature or geometry inconsistent")
    return CertificateReport(
        geo.genus, geo.alpha, geo.alpha_prime, E, W, rayleigh, geo.ell, threshold, bool(holds), eq, qerr, label
    )


def critical_alpha_for_rayleigh(rayleigh: float, genus: int) -> float:
    """Smallest sector half-angle above which ``rayleigh < 1 / ell(alpha)^2``.

    ``ell`` decreases strictly in ``alpha``, so this is a bisection on
    ``ell(alpha) - rayleigh**-0.5``.
    """
    if not rayleigh > 0:
        raise DegenerateInputError("Rayleigh quotient must be positive")
    target = 1.0 / math.sqrt(rayleigh)
    lo, hi = 1e-6, math.pi / (4 * genus) - 1e-9

    def f(a):
        return hyperbolic.boundary_length(genus, a) - target

    if f(hi) >= 0.0:
        raise CertificateInfeasibleError("certificate fails even next to the degenerate angle")
    if f(lo) < 0.0:
        return lo
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def critical_alpha(phi: TestFunction, genus: int = 1) -> float:
    E = dirichlet_energy(phi)
    W = weighted_l2(phi)
    if W == 0.0:
        raise DegenerateInputError("test function vanishes identically")
    return critical_alpha_for_rayleigh(E / W, genus)


def critical_alpha_closed_form(energy: float, l2: float) -> float:
    """Genus-1 closed form ``arctan(cosh(q)^-1/2)`` with ``q = ||phi|| / (4 ||d phi||)``."""
    q = math.sqrt(l2) / (4.0 * math.sqrt(energy))
    return math.atan(1.0 / math.sqrt(math.cosh(q)))


def generalized_max_eigenvalue(A: np.ndarray, M: np.ndarray) -> float:
    """Largest ``mu`` with ``A v = mu M v`` via Cholesky reduction."""
    d = np.sqrt(np.diag(M))
    if np.any(d <= 0) or np.linalg.eigvalsh(M / np.outer(d, d)).min() <= 1e-12:
        raise DependentFamilyError("mass matrix of the family is not positive definite")
    L = np.linalg.cholesky(M)
    X = solve_triangular(L, A, lower=True)
    C = solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    return float(np.linalg.eigvalsh(C)[-1])


def multi_certificate(phis: Sequence[TestFunction], genus: int, alpha: float) -> tuple[float, int]:
    """``(mu_max, certified_count)`` for the span of the family."""
    if not phis:
        raise DegenerateInputError("empty family")
    A, M, _ = gram_matrices(phis)
    mu = generalized_max_eigenvalue(A, M)
    ell = hyperbolic.boundary_length(genus, alpha)
    return mu, len(phis) if mu < 1.0 / ell**2 else 0


def family_rayleigh_max(phis: Sequence[TestFunction]) -> float:
    A, M, _ = gram_matrices(phis)
    return generalized_max_eigenvalue(A, M)
