"""Hyperbolic-plane geometry in the Poincare disk model.

Geodesics are stored as orthodisks (Euclidean disks whose boundary circle
meets the unit circle at right angles).  The Schottky configuration used
throughout is ``4 * genus`` such disks inscribed in equal sectors around
the origin, paired opposite-to-opposite by hyperbolic translations.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GeometryError, SingularEvaluationError

NORM_TOL = 1e-12
ORTHO_TOL = 1e-12
DISK_TOL = 1e-9
SINGULAR_TOL = 1e-14
STITCH_TOL = 1e-9


# ---------------------------------------------------------------------------
# Mobius transformations preserving the unit disk
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MobiusTransform:
    """``z -> (a z + b) / (conj(b) z + conj(a))`` with ``|a|^2 - |b|^2 = 1``."""

    a: complex
    b: complex

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if not math.isfinite(det) or abs(det - 1.0) > NORM_TOL * max(1.0, abs(self.a) ** 2):
            raise DomainError(f"MobiusTransform not normalized: |a|^2-|b|^2 = {det!r}")

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "MobiusTransform":
        a, b = complex(a), complex(b)
        det = abs(a) ** 2 - abs(b) ** 2
        # |a|^2 - |b|^2 cancels catastrophically for long translations; products of
        # normalized factors are already unimodular to working precision there
        if abs(a) ** 2 > 1e4 and abs(det - 1.0) < 1e-9 * abs(a) ** 2:
            return cls(a, b)
        if det <= 0:
            raise DomainError("coefficients do not define a disk automorphism")
        s = math.sqrt(det)
        return cls(a / s, b / s)

    @classmethod
    def from_matrix(cls, m) -> "MobiusTransform":
        """Build from a 2x2 complex matrix that preserves the unit disk (any scale)."""
        m = np.asarray(m, dtype=complex)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < SINGULAR_TOL:
            raise SingularEvaluationError("singular Mobius matrix")
        m = m / cmath.sqrt(det)
        a, b = m[0, 0], m[0, 1]
        scale = max(1.0, abs(a))
        if abs(m[1, 0] - b.conjugate()) > 1e-8 * scale or abs(m[1, 1] - a.conjugate()) > 1e-8 * scale:
            raise DomainError("matrix does not preserve the unit disk")
        return cls.normalized(a, b)

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def rotation(cls, theta: float) -> "MobiusTransform":
        return cls(cmath.exp(0.5j * theta), 0j)

    @classmethod
    def axis_translation(cls, tau: float) -> "MobiusTransform":
        """``z -> (z + tau) / (1 + tau z)`` for real ``|tau| < 1``."""
        if not -1.0 < tau < 1.0:
            raise DomainError("axis translation needs |tau| < 1")
        s = math.sqrt(1.0 - tau * tau)
        return cls(complex(1.0 / s), complex(tau / s))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b.conjugate(), self.a.conjugate()]])

    def __call__(self, z):
        return mobius_apply(self, z)

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        return mobius_compose(self, other)

    def inverse(self) -> "MobiusTransform":
        return mobius_inverse(self)

    def conjugate_by_reflection(self) -> "MobiusTransform":
        """``z -> conj(T(conj z))``."""
        return MobiusTransform(self.a.conjugate(), self.b.conjugate())

    @property
    def trace(self) -> float:
        return 2.0 * self.a.real

    @property
    def translation_length(self) -> float:
        """Translation length of a hyperbolic element (0 for elliptic/parabolic)."""
        t = abs(self.a.real)
        return 2.0 * math.acosh(t) if t > 1.0 else 0.0


def mobius_apply(T: MobiusTransform, z):
    """Apply ``T`` to a point or an array of points in the closed disk."""
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz) > 1.0 + DISK_TOL):
        raise DomainError("mobius_apply expects |z| <= 1")
    den = T.b.conjugate() * zz + T.a.conjugate()
    if np.any(np.abs(den) < SINGULAR_TOL):
        raise SingularEvaluationError("Mobius denominator vanishes")
    w = (T.a * zz + T.b) / den
    if np.ndim(z) == 0:
        return complex(w)
    return w


def mobius_compose(T: MobiusTransform, U: MobiusTransform) -> MobiusTransform:
    """Return ``T o U``."""
    a = T.a * U.a + T.b * U.b.conjugate()
    b = T.a * U.b + T.b * U.a.conjugate()
    return MobiusTransform.normalized(a, b)


def mobius_inverse(T: MobiusTransform) -> MobiusTransform:
    return MobiusTransform.normalized(T.a.conjugate(), -T.b)


def three_point_map(p, q) -> MobiusTransform:
    """Disk automorphism sending boundary points ``p[i] -> q[i]`` (i = 0, 1, 2)."""

    def to_standard(z1, z2, z3):
        # z1 -> 0, z2 -> 1, z3 -> inf
        return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], dtype=complex)

    fp = to_standard(*p)
    fq = to_standard(*q)
    return MobiusTransform.from_matrix(np.linalg.solve(fq, fp))


def hyperbolic_distance(z, w):
    """Poincare-disk distance; vectorized over broadcastable inputs."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(z) >= 1.0) or np.any(np.abs(w) >= 1.0):
        raise DomainError("hyperbolic_distance needs points inside the unit disk")
    # same function as arcosh(1 + 2|z-w|^2 / ((1-|z|^2)(1-|w|^2))), better conditioned
    t = np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)
    d = 2.0 * np.arctanh(np.minimum(t, 1.0))
    return float(d) if d.ndim == 0 else d


# ---------------------------------------------------------------------------
# Orthodisks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrthoDisk:
    center: complex
    radius: float

    def __post_init__(self):
        if self.center == 0:
            raise GeometryError("orthodisk center must be nonzero")
        if not self.radius > 0:
            raise GeometryError("orthodisk radius must be positive")
        c2 = abs(self.center) ** 2
        if abs(c2 - 1.0 - self.radius**2) > ORTHO_TOL * max(1.0, c2):
            raise GeometryError("disk is not orthogonal to the unit circle")

    @classmethod
    def through_ideal_points(cls, p: complex, q: complex) -> "OrthoDisk":
        s = p + q
        if abs(s) < 1e-14:
            raise GeometryError("ideal points are antipodal; geodesic is a diameter")
        c = 2.0 * p * q / s
        return cls(complex(c), math.sqrt(max(abs(c) ** 2 - 1.0, 0.0)))

    @property
    def half_angle(self) -> float:
        """Angular half-width of the arc of the unit circle inside the disk."""
        return math.atan(self.radius)

    @property
    def ideal_endpoints(self) -> tuple[complex, complex]:
        """(counterclockwise, clockwise) endpoints on the unit circle, seen from 0."""
        u = self.center / abs(self.center)
        e = cmath.exp(1j * self.half_angle)
        return u * e, u / e

    @property
    def near_point(self) -> complex:
        """Point of the geodesic closest to the origin."""
        return self.center / abs(self.center) * (abs(self.center) - self.radius)

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def inversive_distance(self, other: "OrthoDisk") -> float:
        return (abs(self.center - other.center) ** 2 - self.radius**2 - other.radius**2) / (
            2.0 * self.radius * other.radius
        )

    def geodesic_points(self, n: int) -> np.ndarray:
        """``n`` points on the geodesic (open arc inside the unit disk)."""
        u = self.center / abs(self.center)
        beta = math.pi / 2 - self.half_angle  # angle of ideal endpoints seen from center
        t = np.linspace(-beta, beta, n + 2)[1:-1]
        return self.center - u * self.radius * np.exp(1j * t)


def _check_alpha(genus: int, alpha: float):
    if genus < 1 or int(genus) != genus:
        raise DomainError("genus must be an integer >= 1")
    if not 0.0 < alpha < math.pi / (4 * genus):
        raise DomainError(f"alpha must lie in (0, pi/(4*genus)); got {alpha!r}")


def sector_angle(j: int, genus: int) -> float:
    return (2 * j - 1) * math.pi / (4 * genus)


def inscribed_disk(j: int, genus: int, alpha: float) -> OrthoDisk:
    """Orthodisk tangent to both rays of the sector of half-angle ``alpha`` around the j-th axis."""
    _check_alpha(genus, alpha)
    if not 1 <= j <= 4 * genus:
        raise DomainError("disk index out of range")
    return OrthoDisk(cmath.exp(1j * sector_angle(j, genus)) / math.cos(alpha), math.tan(alpha))


def core_boundary_disk(j: int, genus: int, alpha: float) -> OrthoDisk:
    """Orthodisk perpendicular to the unit circle and to ``D_j``, ``D_{j+1}``."""
    if genus >= 1 and alpha >= math.pi / (4 * genus):
        raise GeometryError("alpha too large: core boundary disk degenerates")
    _check_alpha(genus, alpha)
    mod = math.cos(alpha) / math.cos(math.pi / (4 * genus))
    return OrthoDisk(mod * cmath.exp(1j * j * math.pi / (2 * genus)), math.sqrt(mod * mod - 1.0))


def limit_points(Da: OrthoDisk, Db: OrthoDisk) -> tuple[complex, complex]:
    """Pair of points inverse with respect to both circles; the first lies in ``Da``.

    For disjoint orthodisks these are the ideal endpoints of the common
    perpendicular geodesic.
    """
    if Da.inversive_distance(Db) <= 1.0:
        raise GeometryError("disks intersect or touch; no common perpendicular")
    s0 = abs(Db.center - Da.center)
    u = (Db.center - Da.center) / s0
    k = (Da.radius**2 + s0**2 - Db.radius**2) / s0
    disc = math.sqrt(k * k - 4.0 * Da.radius**2)
    t1 = (k - disc) / 2.0
    t2 = Da.radius**2 / t1  # product of roots, avoids cancellation
    return complex(Da.center + t1 * u), complex(Da.center + t2 * u)


def common_perpendicular(Da: OrthoDisk, Db: OrthoDisk) -> OrthoDisk:
    p, q = limit_points(Da, Db)
    return OrthoDisk.through_ideal_points(p, q)


def circle_intersection(Da: OrthoDisk, Db: OrthoDisk) -> complex:
    """Intersection point of two crossing orthocircles inside the unit disk."""
    d = abs(Db.center - Da.center)
    u = (Db.center - Da.center) / d
    x = (d * d + Da.radius**2 - Db.radius**2) / (2 * d)
    y = math.sqrt(max(Da.radius**2 - x * x, 0.0))
    cands = [Da.center + u * complex(x, y), Da.center + u * complex(x, -y)]
    return min(cands, key=abs)


def dist_origin_to_geodesic(D: OrthoDisk) -> float:
    t = abs(D.center) - D.radius
    if t >= 1.0:
        raise DomainError("disk lies outside the closed unit disk")
    if t <= 0.0:
        raise DomainError("origin lies inside or on the disk")
    return 2.0 * math.atanh(t)


def dist_between_geodesics(Da: OrthoDisk, Db: OrthoDisk) -> float:
    delta = Da.inversive_distance(Db)
    if delta <= 1.0:
        raise GeometryError(f"geodesics intersect or are tangent (inversive distance {delta!r})")
    return math.acosh(delta)


def boundary_length(genus: int, alpha: float) -> float:
    """Length of the convex-core boundary geodesic (symmetric configuration)."""
    _check_alpha(genus, alpha)
    return 4 * genus * dist_between_geodesics(inscribed_disk(1, genus, alpha), inscribed_disk(2, genus, alpha))


def boundary_length_closed_form(genus: int, alpha: float) -> float:
    s2 = math.sin(alpha) ** 2
    return 4 * genus * math.acosh((1.0 - math.cos(math.pi / (2 * genus)) - s2) / s2)


def generator(j: int, genus: int, alpha: float) -> MobiusTransform:
    """Hyperbolic translation pairing ``D_j`` with ``D_{j+2g}`` (symmetric configuration)."""
    if not 1 <= j <= 2 * genus:
        raise DomainError("generator index out of range")
    D = inscribed_disk(j, genus, alpha)
    tau = -math.tanh(dist_origin_to_geodesic(D))
    R = MobiusTransform.rotation(sector_angle(j, genus))
    return R @ MobiusTransform.axis_translation(tau) @ R.inverse()


def generator_from_disks(Dsrc: OrthoDisk, Dtgt: OrthoDisk) -> MobiusTransform:
    """Translation along the common perpendicular sending ``Dsrc`` onto the exterior of ``Dtgt``.

    Fixes both ends of the common perpendicular and sends the counterclockwise
    ideal endpoint of ``Dsrc`` to the clockwise one of ``Dtgt``.
    """
    A, B = limit_points(Dsrc, Dtgt)
    A, B = A / abs(A), B / abs(B)
    return three_point_map((A, B, Dsrc.ideal_endpoints[0]), (A, B, Dtgt.ideal_endpoints[1]))


# ---------------------------------------------------------------------------
# Surface
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceGeometry:
    genus: int
    alpha: float
    alpha_prime: float
    disks: tuple[OrthoDisk, ...]
    core_disks: tuple[OrthoDisk, ...]
    generators: tuple[MobiusTransform, ...]
    ell: float

    @property
    def symmetric(self) -> bool:
        return self.alpha_prime == self.alpha

    @property
    def n_sides(self) -> int:
        return 4 * self.genus

    def partner(self, s: int) -> int:
        """Index of the side glued to side ``s`` (1-based)."""
        return (s - 1 + 2 * self.genus) % self.n_sides + 1

    def pairing(self, s: int) -> MobiusTransform:
        """Transform mapping side ``s`` onto side ``partner(s)``."""
        g2 = 2 * self.genus
        return self.generators[s - 1] if s <= g2 else self.generators[s - g2 - 1].inverse()

    def gap_cycle(self) -> list[int]:
        """Gaps visited by the core boundary geodesic, starting at the last gap."""
        n = self.n_sides
        seq = [n]
        while True:
            nxt = self.partner(seq[-1] % n + 1)
            if nxt == n:
                return seq
            seq.append(nxt)

    def boundary_element(self) -> MobiusTransform:
        """Group element whose axis covers the core boundary geodesic."""
        W = MobiusTransform.identity()
        n = self.n_sides
        for k in self.gap_cycle():
            W = W @ self.pairing(k % n + 1).inverse()
        return W

    def in_fundamental_domain(self, z):
        return in_fundamental_domain(z, self)

    def in_core(self, z):
        return in_core(z, self)


def make_geometry(genus: int = 1, alpha: float = math.pi / 6, alpha_prime: float | None = None) -> SurfaceGeometry:
    _check_alpha(genus, alpha)
    if alpha_prime is None:
        alpha_prime = alpha
    if not alpha <= alpha_prime < math.pi / (4 * genus):
        raise DomainError("alpha_prime must lie in [alpha, pi/(4*genus))")
    n = 4 * genus
    if alpha_prime == alpha:
        disks = tuple(inscribed_disk(j, genus, alpha) for j in range(1, n + 1))
        cores = tuple(core_boundary_disk(j, genus, alpha) for j in range(1, n + 1))
        gens = tuple(generator(j, genus, alpha) for j in range(1, 2 * genus + 1))
        ell = boundary_length(genus, alpha)
    else:
        if genus != 1:
            raise DomainError("broken symmetry is supported for genus 1 only")
        half = [alpha, alpha_prime, alpha_prime, alpha]
        disks = tuple(
            OrthoDisk(cmath.exp(1j * sector_angle(j, 1)) / math.cos(a), math.tan(a)) for j, a in zip(range(1, 5), half)
        )
        cores = tuple(common_perpendicular(disks[j], disks[(j + 1) % 4]) for j in range(4))
        s1 = generator_from_disks(disks[0], disks[2])
        gens = (s1, s1.inverse().conjugate_by_reflection())
        ell = None
    for i in range(n):
        for k in range(i + 1, n):
            if disks[i].inversive_distance(disks[k]) <= 1.0:
                raise GeometryError(f"disks D_{i + 1} and D_{k + 1} are not disjoint")
    geo = SurfaceGeometry(genus, float(alpha), float(alpha_prime), disks, cores, gens, ell or 0.0)
    if ell is None:
        geo = dataclasses.replace(geo, ell=geo.boundary_element().translation_length)
    return geo


def in_fundamental_domain(z, geo: SurfaceGeometry):
    z = np.asarray(z, dtype=complex)
    ok = np.abs(z) < 1.0
    for D in geo.disks:
        ok &= np.abs(z - D.center) > D.radius
    return bool(ok) if ok.ndim == 0 else ok


def in_core(z, geo: SurfaceGeometry):
    z = np.asarray(z, dtype=complex)
    ok = np.asarray(in_fundamental_domain(z, geo))
    for D in geo.core_disks:
        ok = ok & (np.abs(z - D.center) > D.radius)
    return bool(ok) if ok.ndim == 0 else ok


def ball_margin(geo: SurfaceGeometry) -> float:
    """Euclidean gap between the test-function ball and the nearest disk."""
    beta = math.sqrt(2.0) - 1.0
    return min(abs(D.center) - D.radius - beta for D in geo.disks + geo.core_disks)


# ---------------------------------------------------------------------------
# Arclength coordinate on the core boundary
# ---------------------------------------------------------------------------


def _geodesic_point(P: complex, Q: complex, s):
    """Point at hyperbolic distance ``s`` from ``P`` along the geodesic towards ``Q``.

    Returns (point, unit Euclidean tangent).
    """
    w = (Q - P) / (1.0 - P.conjugate() * Q)
    u = w / abs(w)
    t = np.tanh(np.asarray(s, dtype=float) / 2.0) * u
    den = 1.0 + P.conjugate() * t
    z = (t + P) / den
    tan = u / den**2  # derivative of the inverse map, times the direction
    return z, tan / np.abs(tan)


def geodesic_arclength(P: complex, Q: complex, D: OrthoDisk, order: int = 64) -> float:
    """Hyperbolic length of the arc of ``D`` between ``P`` and ``Q`` by Gauss-Legendre."""
    tp = cmath.phase((P - D.center) / (Q - D.center))
    a0 = cmath.phase(Q - D.center)
    x, wts = np.polynomial.legendre.leggauss(order)
    t = a0 + (x + 1.0) * tp / 2.0
    z = D.center + D.radius * np.exp(1j * t)
    integrand = 2.0 * D.radius / (1.0 - np.abs(z) ** 2)
    return float(abs(tp) / 2.0 * np.dot(wts, integrand))


@dataclass(frozen=True)
class Arc:
    gap: int
    y_start: float
    y_end: float
    start: complex
    end: complex


@dataclass
class BoundaryParametrization:
    """Arclength coordinate ``y`` on the core boundary geodesic, ``y`` in ``R / ell Z``."""

    total_length: float
    arcs: list[Arc]
    y: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    tangents: np.ndarray = field(repr=False)

    def _arc_for(self, y: float) -> Arc:
        for arc in self.arcs:
            if arc.y_start <= y < arc.y_end:
                return arc
        return self.arcs[-1]

    def locate(self, y: float) -> tuple[complex, complex, int]:
        """(point, unit tangent, gap index) at coordinate ``y``."""
        y = float(y) % self.total_length
        arc = self._arc_for(y)
        z, t = _geodesic_point(arc.start, arc.end, y - arc.y_start)
        return complex(z), complex(t), arc.gap

    def point(self, y: float) -> complex:
        return self.locate(y)[0]

    def tangent(self, y: float) -> complex:
        return self.locate(y)[1]


def _foot_points(geo: SurfaceGeometry, k: int) -> tuple[complex, complex]:
    """Endpoints of the core-boundary arc in gap ``k``: (on side k, on side k+1)."""
    n = geo.n_sides
    Dp = geo.core_disks[k - 1]
    return circle_intersection(Dp, geo.disks[k - 1]), circle_intersection(Dp, geo.disks[k % n])


def parametrize_core_boundary(geo: SurfaceGeometry, n_samples: int = 256) -> BoundaryParametrization:
    n = geo.n_sides
    cycle = geo.gap_cycle()
    first = geo.core_disks[n - 1]
    anchor = complex(abs(first.center) - first.radius, 0.0)
    if abs(first.center.imag) > 1e-12:
        raise GeometryError("last core disk must be centered on the positive real axis")

    pieces = []  # (gap, start point, end point, disk)
    p_start, p_end = _foot_points(geo, n)
    pieces.append((n, anchor, p_end, first))
    prev_end, prev_side = p_end, 1
    for k in cycle[1:] + [n]:
        s, e = _foot_points(geo, k)
        image = geo.pairing(prev_side)(prev_end)
        if abs(image - s) > STITCH_TOL:
            raise GeometryError(f"core boundary arcs do not stitch at gap {k} (mismatch {abs(image - s):.3e})")
        if k == n:
            pieces.append((n, s, anchor, first))
        else:
            pieces.append((k, s, e, geo.core_disks[k - 1]))
            prev_end, prev_side = e, k % n + 1

    arcs = []
    y0 = 0.0
    for gap, s, e, D in pieces:
        length = geodesic_arclength(s, e, D)
        arcs.append(Arc(gap, y0, y0 + length, s, e))
        y0 += length
    total = y0
    bp = BoundaryParametrization(total, arcs, np.empty(0), np.empty(0, complex), np.empty(0, complex))
    ys = np.arange(n_samples) * total / n_samples
    loc = [bp.locate(y) for y in ys]
    bp.y = ys
    bp.points = np.array([p for p, _, _ in loc])
    bp.tangents = np.array([t for _, t, _ in loc])
    return bp


def identity_residuals(geo: SurfaceGeometry) -> dict:
    """Residuals of the trigonometric identity chain (meaningful for genus 1)."""
    rho = dist_origin_to_geodesic(geo.disks[0])
    ell = geo.ell
    ta = math.tan(geo.alpha)
    out = {
        "parallelism": ta * math.sinh(rho) - 1.0,
        "ell_closed_form": geo.ell - boundary_length_closed_form(geo.genus, geo.alpha) if geo.symmetric else None,
        "ell_trace": geo.ell - geo.boundary_element().translation_length,
    }
    if geo.genus == 1:
        out["pentagon"] = math.cosh(ell / 4) - math.sinh(rho) ** 2
        out["tan2_cosh"] = ta * ta * math.cosh(ell / 4) - 1.0
    return out
