import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from cylend import hyperbolic as hy
from cylend.errors import DomainError, GeometryError, SingularEvaluationError

PI4 = math.pi / 4
alphas1 = st.floats(0.05, PI4 - 0.01)
disk_pts = st.tuples(st.floats(0, 0.95), st.floats(0, 2 * math.pi)).map(lambda t: t[0] * cmath.exp(1j * t[1]))


def admissible(genus):
    return st.floats(0.02, math.pi / (4 * genus) - 0.01)


def arc_samples(D, n):
    """Points of the geodesic of D, parametrized by the angle around the center (independent of geodesic_points)."""
    u = D.center / abs(D.center)
    half = math.atan(1.0 / D.radius)  # angle at the center between -u and an ideal endpoint
    t = np.linspace(-half, half, n)[1:-1]
    return D.center - D.radius * u * np.exp(1j * t)


# ---------------------------------------------------------------------------
# Mobius transforms
# ---------------------------------------------------------------------------


def test_identity_and_axis_translation_examples():
    I = hy.MobiusTransform.identity()
    assert I(0.3 + 0.1j) == pytest.approx(0.3 + 0.1j, abs=1e-15)
    T0 = hy.MobiusTransform.axis_translation(-math.sqrt(3) / 2)
    assert T0(1 / math.sqrt(3)) == pytest.approx(-1 / math.sqrt(3), abs=1e-14)


def test_apply_domain_and_singular():
    with pytest.raises(DomainError):
        hy.MobiusTransform.identity()(1.5)
    # b conj(z) + conj(a) vanishes only off the closed disk for normalized maps; force it with a raw map
    bad = hy.MobiusTransform.__new__(hy.MobiusTransform)
    object.__setattr__(bad, "a", 1.0 + 0j)
    object.__setattr__(bad, "b", 1.0 + 0j)
    with pytest.raises(SingularEvaluationError):
        hy.mobius_apply(bad, -1.0)


@settings(max_examples=60, deadline=None)
@given(alphas1, disk_pts, disk_pts)
def test_isometry_invariance(alpha, z, w):
    S1 = hy.generator(1, 1, alpha)
    assert abs(S1.a) ** 2 - abs(S1.b) ** 2 == pytest.approx(1.0, abs=1e-12)
    d0 = hy.hyperbolic_distance(z, w)
    d1 = hy.hyperbolic_distance(S1(z), S1(w)) if max(abs(S1(z)), abs(S1(w))) < 1 - 1e-12 else None
    if d1 is not None:
        assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(alphas1, st.floats(0, 2 * math.pi))
def test_unit_circle_preserved(alpha, t):
    for T in hy.make_geometry(1, alpha).generators:
        assert abs(T(cmath.exp(1j * t))) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(alphas1, disk_pts)
def test_composition_and_inverse(alpha, z):
    geo = hy.make_geometry(1, alpha)
    S1, S2 = geo.generators
    assert (S1 @ S1.inverse())(z) == pytest.approx(z, abs=1e-12)
    lhs = (S1 @ S2)(0.3 * z)
    assert lhs == pytest.approx(S1(S2(0.3 * z)), abs=1e-12)
    C = S1 @ S2 @ S1.inverse()
    # |a|^2 - |b|^2 is itself only computable to ~|a|^2 * eps in floating point
    assert abs(abs(C.a) ** 2 - abs(C.b) ** 2 - 1.0) < 1e-12 * max(1.0, abs(C.a) ** 2)


def test_compose_with_identity():
    S1 = hy.generator(1, 1, math.pi / 6)
    T = S1 @ hy.MobiusTransform.identity()
    assert T.a == pytest.approx(S1.a) and T.b == pytest.approx(S1.b)
    assert (S1 @ S1.inverse())(0.2j) == pytest.approx(0.2j, abs=1e-12)


def test_long_word_stays_normalized():
    # products of many long translations used to lose |a|^2 - |b|^2 = 1 to cancellation
    geo = hy.make_geometry(2, 0.05)
    W = geo.boundary_element()
    assert W.translation_length == pytest.approx(geo.ell, rel=1e-10)


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def test_distance_examples():
    assert hy.hyperbolic_distance(0, 0) == 0.0
    assert hy.hyperbolic_distance(0, 0.5) == pytest.approx(math.log(3), abs=1e-14)
    with pytest.raises(DomainError):
        hy.hyperbolic_distance(0, 1.0)


@settings(max_examples=60, deadline=None)
@given(disk_pts, disk_pts)
def test_distance_matches_arcosh_form(z, w):
    ref = math.acosh(1 + 2 * abs(z - w) ** 2 / ((1 - abs(z) ** 2) * (1 - abs(w) ** 2)))
    assert hy.hyperbolic_distance(z, w) == pytest.approx(ref, rel=1e-8, abs=1e-7)
    assert hy.hyperbolic_distance(z, w) == pytest.approx(hy.hyperbolic_distance(w, z), abs=1e-14)


def test_dist_origin_examples_and_oracle():
    D1 = hy.inscribed_disk(1, 1, math.pi / 6)
    rho = hy.dist_origin_to_geodesic(D1)
    assert rho == pytest.approx(math.asinh(math.sqrt(3)), abs=1e-14)
    assert rho == pytest.approx(2 * math.atanh(1 / math.sqrt(3)), abs=1e-14)
    pts = arc_samples(D1, 10_000)
    assert np.min(hy.hyperbolic_distance(0, pts)) == pytest.approx(rho, abs=1e-6)


@pytest.mark.parametrize("alpha", np.round(np.arange(0.1, 0.781, 0.02), 4))
def test_parallelism_grid(alpha):
    rho = hy.dist_origin_to_geodesic(hy.inscribed_disk(1, 1, alpha))
    assert abs(math.tan(alpha) * math.sinh(rho) - 1.0) < 1e-12


def test_dist_between_geodesics_example_and_tangent():
    D1, D2 = hy.inscribed_disk(1, 1, math.pi / 6), hy.inscribed_disk(2, 1, math.pi / 6)
    assert hy.dist_between_geodesics(D1, D2) == pytest.approx(math.acosh(3), abs=1e-14)
    # two orthodisks touching at one point: delta = 1
    r = 0.5
    c = math.sqrt(1 + r * r)
    t = math.asin(r / c)
    Da, Db = hy.OrthoDisk(c * cmath.exp(1j * t), r), hy.OrthoDisk(c * cmath.exp(-1j * t), r)
    assert Da.inversive_distance(Db) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(GeometryError):
        hy.dist_between_geodesics(Da, Db if Da.inversive_distance(Db) <= 1 else hy.OrthoDisk(Db.center * cmath.exp(0.01j), r))


def _pair_oracle(Da, Db):
    ua, ub = Da.center / abs(Da.center), Db.center / abs(Db.center)
    ha, hb = math.atan(1 / Da.radius), math.atan(1 / Db.radius)

    def pa(s):
        return Da.center - Da.radius * ua * np.exp(1j * s)

    def pb(s):
        return Db.center - Db.radius * ub * np.exp(1j * s)

    sa = np.linspace(-ha, ha, 402)[1:-1]
    sb = np.linspace(-hb, hb, 402)[1:-1]
    D = hy.hyperbolic_distance(pa(sa)[:, None], pb(sb)[None, :])
    i, j = np.unravel_index(np.argmin(D), D.shape)
    f = lambda v: hy.hyperbolic_distance(pa(np.clip(v[0], -ha * 0.999999, ha * 0.999999)), pb(np.clip(v[1], -hb * 0.999999, hb * 0.999999)))
    res = minimize(f, [sa[i], sb[j]], method="Nelder-Mead", options=dict(xatol=1e-10, fatol=1e-13))
    return min(res.fun, D[i, j])


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 1.2), st.floats(0.05, 1.2), st.floats(0.6, 3.0))
def test_inversive_distance_vs_sampling_oracle(ra, rb, sep):
    Da = hy.OrthoDisk(math.sqrt(1 + ra * ra) + 0j, ra)
    Db = hy.OrthoDisk(math.sqrt(1 + rb * rb) * cmath.exp(1j * sep), rb)
    if Da.inversive_distance(Db) <= 1.05:
        return
    assert hy.dist_between_geodesics(Da, Db) == pytest.approx(_pair_oracle(Da, Db), abs=1e-5)


# ---------------------------------------------------------------------------
# disks
# ---------------------------------------------------------------------------


def test_inscribed_disk_examples():
    D = hy.inscribed_disk(1, 1, math.pi / 6)
    assert D.center == pytest.approx(1.1547005383792517 * cmath.exp(1j * PI4), abs=1e-12)
    assert D.radius == pytest.approx(0.5773502691896258, abs=1e-14)
    # tangent to both sector rays arg z = pi/4 +- alpha
    for s in (+1, -1):
        ray = cmath.exp(1j * (PI4 + s * math.pi / 6))
        dist = abs((D.center * ray.conjugate()).imag)
        assert dist == pytest.approx(D.radius, abs=1e-12)
    near = hy.inscribed_disk(1, 1, PI4 - 1e-9)
    assert near.radius == pytest.approx(1.0, abs=1e-8) and abs(near.center) == pytest.approx(math.sqrt(2), abs=1e-8)
    a = PI4
    assert (1 - math.sin(a)) / math.cos(a) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    with pytest.raises(DomainError):
        hy.inscribed_disk(1, 1, PI4)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3).flatmap(lambda g: st.tuples(st.just(g), admissible(g))))
def test_core_disk_orthogonality(ga):
    g, alpha = ga
    for j in range(1, 4 * g + 1):
        C = hy.core_boundary_disk(j, g, alpha)
        assert abs(C.center) ** 2 == pytest.approx(1 + C.radius**2, abs=1e-12)
        for k in (j, j % (4 * g) + 1):
            D = hy.inscribed_disk(k, g, alpha)
            assert abs(abs(C.center - D.center) ** 2 - C.radius**2 - D.radius**2) < 1e-12 * max(1, abs(C.center) ** 2)


def test_core_disk_examples():
    C = hy.core_boundary_disk(1, 1, math.pi / 6)
    assert abs(C.center) == pytest.approx(1.2247448713915890, abs=1e-14)
    assert C.radius == pytest.approx(0.7071067811865476, abs=1e-14)
    assert cmath.phase(C.center) == pytest.approx(math.pi / 2, abs=1e-14)
    assert hy.core_boundary_disk(1, 1, PI4 - 1e-10).radius < 1e-4
    with pytest.raises(GeometryError):
        hy.core_boundary_disk(1, 1, PI4)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3).flatmap(lambda g: st.tuples(st.just(g), st.floats(1e-4, math.pi / (4 * g) - 1e-6))))
def test_ball_margin_positive(ga):
    g, alpha = ga
    geo = hy.make_geometry(g, alpha)
    assert hy.ball_margin(geo) > 0
    for i, D in enumerate(geo.disks):
        for E in geo.disks[i + 1:]:
            assert D.inversive_distance(E) > 1.0


def test_orthodisk_validation():
    with pytest.raises(GeometryError):
        hy.OrthoDisk(0j, 1.0)
    with pytest.raises(GeometryError):
        hy.OrthoDisk(2 + 0j, 1.0)


# ---------------------------------------------------------------------------
# boundary length
# ---------------------------------------------------------------------------


def test_boundary_length_example():
    assert hy.boundary_length(1, math.pi / 6) == pytest.approx(4 * math.acosh(3), abs=1e-13)
    assert hy.boundary_length(1, math.pi / 6) == pytest.approx(7.0509887, abs=1e-7)
    assert hy.boundary_length(1, PI4 - 1e-9) < 1e-3


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4).flatmap(lambda g: st.tuples(st.just(g), admissible(g))))
def test_closed_form_vs_inversive(ga):
    g, alpha = ga
    assert abs(hy.boundary_length(g, alpha) - hy.boundary_length_closed_form(g, alpha)) < 1e-12 * max(1, hy.boundary_length(g, alpha))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, PI4 - 0.01), st.floats(0.05, PI4 - 0.01))
def test_ell_decreasing(a, b):
    if a < b:
        assert hy.boundary_length(1, a) > hy.boundary_length(1, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda g: st.tuples(st.just(g), admissible(g))))
def test_trace_of_boundary_word(ga):
    g, alpha = ga
    geo = hy.make_geometry(g, alpha)
    assert geo.boundary_element().translation_length == pytest.approx(geo.ell, rel=1e-10)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def test_generator_examples():
    S1 = hy.generator(1, 1, math.pi / 6)
    e = cmath.exp(1j * PI4)
    assert S1(e / math.sqrt(3)) == pytest.approx(-e / math.sqrt(3), abs=1e-14)
    assert S1(e) == pytest.approx(e, abs=1e-12)
    assert S1(-e) == pytest.approx(-e, abs=1e-12)
    rho = hy.dist_origin_to_geodesic(hy.inscribed_disk(1, 1, math.pi / 6))
    assert S1.translation_length == pytest.approx(2 * rho, rel=1e-12)


@pytest.mark.parametrize("genus", [1, 2, 3])
def test_generators_pair_disks(genus):
    alpha = 0.8 * math.pi / (4 * genus)
    geo = hy.make_geometry(genus, alpha)
    for j in range(1, 2 * genus + 1):
        S = geo.generators[j - 1]
        src, dst = geo.disks[j - 1], geo.disks[j + 2 * genus - 1]
        img = S(arc_samples(src, 42))
        assert np.max(np.abs(np.abs(img - dst.center) - dst.radius)) < 1e-10
        # interior of D_j lands outside D_{j+2g}
        inside = src.center / abs(src.center) * (abs(src.center) - 0.5 * src.radius)
        assert abs(S(inside) - dst.center) > dst.radius


@settings(max_examples=40, deadline=None)
@given(alphas1, disk_pts)
def test_reflection_conjugation(alpha, z):
    S1, S2 = hy.make_geometry(1, alpha).generators
    assert np.conj(S1.inverse()(np.conj(z))) == pytest.approx(S2(z), abs=1e-12)
    assert np.conj(S1(np.conj(z))) == pytest.approx(S2.inverse()(z), abs=1e-12)


def test_generator_from_disks_matches_symmetric():
    geo = hy.make_geometry(1, 0.6)
    T = hy.generator_from_disks(geo.disks[0], geo.disks[2])
    z = np.array([0.1, 0.2j, -0.3 + 0.1j])
    assert np.allclose(T(z), geo.generators[0](z), atol=1e-12)


def test_broken_symmetry():
    geo = hy.make_geometry(1, 0.6, 0.7)
    S1, S2 = geo.generators
    for S, (s, t) in ((S1, (0, 2)), (S2, (1, 3))):
        img = S(arc_samples(geo.disks[s], 40))
        assert np.max(np.abs(np.abs(img - geo.disks[t].center) - geo.disks[t].radius)) < 1e-10
    assert hy.boundary_length(1, 0.7) < geo.ell < hy.boundary_length(1, 0.6)
    assert hy.ball_margin(geo) > 0
    with pytest.raises(DomainError):
        hy.make_geometry(1, 0.6, 0.5)
    with pytest.raises(DomainError):
        hy.make_geometry(2, 0.3, 0.35)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3).flatmap(lambda g: st.tuples(st.just(g), admissible(g))))
def test_membership(ga):
    from cylend.quadrature import polar_nodes

    g, alpha = ga
    geo = hy.make_geometry(g, alpha)
    assert geo.in_core(0) and geo.in_fundamental_domain(0)
    assert not geo.in_fundamental_domain(geo.disks[0].center)
    x, y, _ = polar_nodes(math.sqrt(2) - 1, 32, 32)
    assert np.all(geo.in_core(x + 1j * y))
    z = np.random.default_rng(0).uniform(-1, 1, (200, 2)) @ np.array([1, 1j])
    z = z[np.abs(z) < 1]
    assert np.all(~geo.in_core(z) | geo.in_fundamental_domain(z))


# ---------------------------------------------------------------------------
# boundary parametrization
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, math.pi / 6, 0.7, PI4 - 0.01])
def test_boundary_parametrization(alpha):
    geo = hy.make_geometry(1, alpha)
    bp = hy.parametrize_core_boundary(geo, 64)
    assert abs(bp.total_length - geo.ell) < 1e-8 * geo.ell
    assert bp.point(0.0).imag == pytest.approx(0.0, abs=1e-12) and bp.point(0.0).real > 0
    p = bp.point(geo.ell / 2)
    assert p.imag == pytest.approx(0.0, abs=1e-12) and p.real < 0
    for y in (np.arange(16) + 0.37) * geo.ell / 16:
        assert bp.point(-y) == pytest.approx(np.conj(bp.point(y)), abs=1e-9)
        assert abs(bp.tangent(y)) == pytest.approx(1.0, abs=1e-12)
    # at arc junctions the two disk-model lifts of one surface point differ by a side pairing
    for arc in bp.arcs[1:-1]:
        z, w = bp.point(-arc.y_start), np.conj(bp.point(arc.y_start))
        lifts = [w] + [geo.pairing(s)(w) for s in range(1, 5)]
        assert min(abs(z - v) for v in lifts) < 1e-9
    # the point a (end of the first arc, on side D_1, upper half) receives y = ell / 8
    first = bp.arcs[0]
    a, D1 = first.end, geo.disks[0]
    assert first.y_end == pytest.approx(geo.ell / 8, rel=1e-10)
    assert abs(abs(a - D1.center) - D1.radius) < 1e-9 and a.imag > 0
    z = bp.point(geo.ell / 8)
    assert min(abs(z - v) for v in [a] + [geo.pairing(s)(a) for s in range(1, 5)]) < 1e-9


def test_boundary_points_lie_on_core_disks():
    geo = hy.make_geometry(2, 0.3)
    bp = hy.parametrize_core_boundary(geo, 32)
    assert abs(bp.total_length - geo.ell) < 1e-8 * geo.ell
    for y in np.linspace(0, geo.ell, 23, endpoint=False):
        z = bp.point(y)
        d = min(abs(abs(z - C.center) - C.radius) for C in geo.core_disks)
        assert d < 1e-9


def test_broken_parametrization_stitch_error():
    with pytest.raises(GeometryError):
        hy.parametrize_core_boundary(hy.make_geometry(1, 0.6, 0.7), 32)


def test_identity_residuals():
    res = hy.identity_residuals(hy.make_geometry(1, 0.5))
    assert all(abs(v) < 1e-12 for v in res.values() if v is not None)
