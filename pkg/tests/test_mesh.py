import json
import math

import numpy as np
import pytest

from cylend import hyperbolic as hy
from cylend import mesh
from cylend import profile as pr
from cylend.errors import DomainError, GeometryError, MeshError


@pytest.fixture(scope="module")
def geo():
    return hy.make_geometry(1, math.pi / 6)


@pytest.fixture(scope="module")
def core(geo):
    return mesh.build_core_mesh(geo, 0.05)


@pytest.fixture(scope="module")
def glued(geo):
    prof = pr.make_profile(1.0, 3.0, geo.ell)
    return mesh.build_glued_mesh(geo, prof, 0.1, 5.0)


def test_core_topology_and_area(core):
    assert mesh.core_euler_characteristic(core) == -1
    assert abs(mesh.core_hyperbolic_area(core) / (2 * math.pi) - 1) < 0.02


def test_core_area_fine():
    c = mesh.build_core_mesh(hy.make_geometry(1, math.pi / 6), 0.025)
    assert abs(mesh.core_hyperbolic_area(c) / (2 * math.pi) - 1) < 0.005


def test_core_quality(core):
    pts = np.c_[core.points.real, core.points.imag]
    assert np.all(mesh._signed_area2(pts, core.triangles) > 0)
    assert mesh._min_angles(pts, core.triangles).min() > mesh.MIN_ANGLE_DEG


def test_reflection_exact(core):
    p = np.arange(len(core.points))
    assert np.max(np.abs(np.conj(core.points[p]) - core.points[core.mirror[p]])) < 1e-12
    assert np.array_equal(core.mirror[core.mirror], p)


def test_side_pairings(core, geo):
    for a, b, s in core.side_pairs:
        assert abs(geo.pairing(s)(core.points[a]) - core.points[b]) < 1e-9
    g = geo.genus
    for j in range(1, 4 * g + 1):
        D = geo.disks[j - 1]
        z = core.points[core.side_nodes[j]]
        assert np.max(np.abs(np.abs(z - D.center) - D.radius)) < 1e-9


def test_interface_nodes_follow_parametrization(core, geo):
    bp = hy.parametrize_core_boundary(geo, 8)
    for node, m in core.boundary_y_index.items():
        w = bp.point(m * geo.ell / core.n_y)
        z = core.points[node]
        # junction points have one lift per side; compare modulo the pairings
        d = min(abs(z - v) for v in [w] + [geo.pairing(s)(w) for s in range(1, 5)])
        assert d < 1e-9


def test_node_count_scaling(geo):
    n1 = len(mesh.build_core_mesh(geo, 0.1).points)
    n2 = len(mesh.build_core_mesh(geo, 0.05).points)
    assert 3.0 < n2 / n1 < 5.0


def test_genus_two_core():
    c = mesh.build_core_mesh(hy.make_geometry(2, 0.3), 0.06)
    assert mesh.core_euler_characteristic(c) == -3
    assert abs(mesh.core_hyperbolic_area(c) / (6 * math.pi) - 1) < 0.02


def test_broken_symmetry_not_meshed():
    with pytest.raises(GeometryError):
        mesh.build_core_mesh(hy.make_geometry(1, 0.6, 0.7), 0.1)


def test_bad_mesh_size(geo):
    with pytest.raises(DomainError):
        mesh.build_core_mesh(geo, 0.0)
    with pytest.raises(MeshError):
        mesh.build_core_mesh(geo, 0.1, n_y=12)


def test_end_mesh_structure():
    ell, L, h = 1.3, 5.0, 0.1
    end = mesh.build_end_mesh(ell, L, h, n_y=16, breaks=(1.0, 3.0))
    n_r = len(end.r) - 1
    assert end.n_nodes == (n_r + 1) * end.n_y == len(end.points)
    assert end.n_y % 2 == 0
    y = end.y
    assert 0.0 in y and ell / 2 in y
    assert 1.0 in end.r and 3.0 in end.r and end.r[0] == 0.0 and end.r[-1] == L
    # periodic wrap: the triangle strip closes up, (r, ell) is node (r, 0)
    assert end.node(3, end.n_y) == end.node(3, 0)
    assert mesh._signed_area2(mesh.end_element_geometry(end).reshape(-1, 2), np.arange(3 * len(end.triangles)).reshape(-1, 3)).min() > 0
    with pytest.raises(MeshError):
        mesh.build_end_mesh(ell, L, h, n_y=15)


def test_end_mesh_reflection_invariant():
    end = mesh.build_end_mesh(1.0, 2.0, 0.1, n_y=16)
    iy = np.arange(end.n_nodes) % end.n_y
    ir = np.arange(end.n_nodes) // end.n_y
    J = end.node(ir, -iy)
    tris = {tuple(sorted(t)) for t in end.triangles.tolist()}
    assert {tuple(sorted(t)) for t in J[end.triangles].tolist()} == tris


def test_glued_mesh(glued, geo):
    assert glued.euler_characteristic() == -1
    # involution is a well defined permutation of the dofs
    s = glued.symmetry
    assert np.array_equal(s[s], np.arange(glued.n_dof))
    # truncation ring: n_y dofs, none fixed except the two fixed-line nodes
    assert len(glued.truncation) == glued.n_y
    assert len(np.intersect1d(glued.truncation, glued.fixed)) == 2
    # interface pairs share a dof and have matching y
    for c, e in glued.interface_pairs:
        assert glued.dof[c] == glued.dof[e]
        assert glued.points[e, 0] == 0.0
    json.dumps(glued.to_dict())


def test_flat_end_alone():
    end = mesh.build_end_mesh(2.0, 1.0, 0.1)
    gm = mesh.glue(None, end, 0.1)
    assert gm.n_dof == end.n_nodes
    # annulus: chi = 0
    assert gm.euler_characteristic() == 0
