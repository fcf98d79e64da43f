"""Two-chart triangulation of the surface with a truncated cylindrical end.

The core chart lives in the disk model: the lift ``F - U D_j'`` of the convex
core, meshed on its upper half and reflected by conjugation so the involution
``J`` maps the mesh onto itself.  Nodes on the paired sides are generated on
half of the sides and pushed to the others with the generators, so every
side pairing is an exact node bijection.  The end chart uses coordinates
``(r, y)`` on ``[0, L] x R/ell Z`` with a structured, ``y -> -y`` symmetric grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import triangle

from . import hyperbolic
from .errors import DomainError, GeometryError, MeshError
from .hyperbolic import SurfaceGeometry, _geodesic_point

CORE, END = 0, 1
MIN_ANGLE_DEG = 15.0
MATCH_TOL = 1e-9


@dataclass
class CoreChart:
    points: np.ndarray  # complex
    triangles: np.ndarray
    # boundary bookkeeping
    boundary_y_index: dict  # node -> index m of y = m * ell / n_y on the core boundary
    side_nodes: dict  # side s -> ordered node array along the side (ccw w.r.t. the domain)
    side_pairs: list  # (node on side s, node on side partner(s), s) for s <= 2g
    mirror: np.ndarray  # node -> node of conj(z)
    n_y: int
    geo: SurfaceGeometry = field(repr=False)


@dataclass
class EndChart:
    r: np.ndarray  # radial grid (n_r + 1,)
    n_y: int
    ell: float
    points: np.ndarray  # (N, 2) (r, y), node index = i_r * n_y + i_y
    triangles: np.ndarray

    def node(self, i_r, i_y):
        return np.asarray(i_r) * self.n_y + np.mod(i_y, self.n_y)

    @property
    def n_nodes(self):
        return len(self.r) * self.n_y

    @property
    def y(self):
        return np.arange(self.n_y) * self.ell / self.n_y


@dataclass
class GluedMesh:
    """Raw nodes of both charts plus the identifications that glue them."""

    points: np.ndarray  # (N, 2) chart coordinates
    chart: np.ndarray  # (N,) CORE / END
    triangles: np.ndarray  # (T, 3) raw node indices, ccw in chart coordinates
    tri_chart: np.ndarray  # (T,)
    dof: np.ndarray  # raw node -> degree of freedom
    n_dof: int
    side_pairs: np.ndarray  # (P, 3): raw node, raw partner, side index
    interface_pairs: np.ndarray  # (Q, 2): core raw node, end raw node
    symmetry: np.ndarray  # dof -> dof of its J image
    fixed: np.ndarray  # dofs fixed by J
    truncation: np.ndarray  # dofs at r = L
    h: float
    L: float
    ell: float
    genus: int
    n_y: int

    @property
    def symmetry_pairs(self) -> np.ndarray:
        d = np.arange(self.n_dof)
        keep = d < self.symmetry
        return np.stack([d[keep], self.symmetry[keep]], axis=1)

    def dof_triangles(self) -> np.ndarray:
        return self.dof[self.triangles]

    def euler_characteristic(self) -> int:
        t = np.sort(self.dof_triangles(), axis=1)
        edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [0, 2]]])
        n_edges = len(np.unique(edges, axis=0))
        return int(self.n_dof - n_edges + len(t))

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "ell": self.ell,
            "h": self.h,
            "L": self.L,
            "n_y": self.n_y,
            "vertices": self.points.tolist(),
            "chart": self.chart.tolist(),
            "triangles": self.triangles.tolist(),
            "dof": self.dof.tolist(),
            "side_pairs": self.side_pairs.tolist(),
            "interface_pairs": self.interface_pairs.tolist(),
            "symmetry": self.symmetry.tolist(),
            "fixed": self.fixed.tolist(),
            "truncation": self.truncation.tolist(),
        }


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def choose_n_y(ell: float, h: float, genus: int) -> int:
    """Number of y cells: a multiple of ``8 * genus`` with spacing at most ``h``."""
    q = 8 * genus
    return q * max(1, math.ceil(ell / (q * h)))


def _geodesic_nodes(P: complex, Q: complex, h: float) -> np.ndarray:
    """Nodes from P to Q (inclusive) at equal hyperbolic spacing <= h."""
    d = hyperbolic.hyperbolic_distance(P, Q)
    n = max(1, math.ceil(d / h))
    z, _ = _geodesic_point(P, Q, np.linspace(0.0, d, n + 1))
    z[0], z[-1] = P, Q
    return z


def _min_angles(pts2: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p = pts2[tris]
    out = np.full(len(tris), np.inf)
    for i in range(3):
        a = p[:, (i + 1) % 3] - p[:, i]
        b = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.sum(a * b, 1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        out = np.minimum(out, np.degrees(np.arccos(np.clip(cosang, -1, 1))))
    return out


def _signed_area2(pts2, tris):
    p = pts2[tris]
    return (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])


def _match(src: np.ndarray, dst: np.ndarray, what: str) -> np.ndarray:
    """Index of the point of ``dst`` coinciding with each point of ``src``."""
    d = np.abs(src[:, None] - dst[None, :])
    idx = np.argmin(d, axis=1)
    err = d[np.arange(len(src)), idx]
    if err.size and err.max() > MATCH_TOL:
        raise MeshError(f"{what}: paired nodes do not coincide (max mismatch {err.max():.2e})")
    return idx


# ---------------------------------------------------------------------------
# core chart
# ---------------------------------------------------------------------------


def _upper_boundary(geo: SurfaceGeometry, bp, n_y: int, h: float):
    """Counterclockwise boundary loop of the upper half of the core lift.

    Returns (points, list of (kind, payload) per point) where kind is
    'arc' (payload = y index), 'side' (payload = side), or 'axis'.
    """
    g = geo.genus
    n = geo.n_sides
    dy = bp.total_length / n_y
    arcs_by_gap = {}
    for i, arc in enumerate(bp.arcs):
        arcs_by_gap.setdefault(arc.gap, []).append(arc)

    def arc_nodes(arc, m_lo, m_hi):
        ms = np.arange(m_lo, m_hi + 1)
        z, _ = _geodesic_point(arc.start, arc.end, ms * dy - arc.y_start)
        return z, ms

    def y_index(yv):
        m = yv / dy
        mi = int(round(m))
        if abs(m - mi) > 1e-6:
            raise MeshError("arc endpoint is not on the y grid")
        return mi

    loop_pts, loop_tags = [], []

    def push(zs, tags):
        for z, t in zip(zs, tags):
            if loop_pts and abs(loop_pts[-1] - z) < MATCH_TOL:
                # keep the arc tag: it carries the interface information
                if t[0] == "arc":
                    loop_tags[-1] = t
                continue
            loop_pts.append(complex(z))
            loop_tags.append(t)

    # side nodes: free on sides 1..g, pushed forward for g+1..2g
    side_nodes = {}
    for j in range(1, g + 1):
        start = hyperbolic.circle_intersection(geo.core_disks[(j - 2) % n], geo.disks[j - 1])
        end = hyperbolic.circle_intersection(geo.core_disks[j - 1], geo.disks[j - 1])
        side_nodes[j] = _geodesic_nodes(start, end, h)
    for j in range(1, g + 1):
        jp = 2 * g + 1 - j
        img = np.conj(geo.generators[j - 1](side_nodes[j]))
        start = hyperbolic.circle_intersection(geo.core_disks[(jp - 2) % n], geo.disks[jp - 1])
        if abs(img[0] - start) > abs(img[-1] - start):
            img = img[::-1]
        if abs(img[0] - start) > MATCH_TOL:
            raise MeshError(f"pushed-forward side {jp} nodes miss the core boundary")
        side_nodes[jp] = img

    # gap 4g, upper half: anchor -> foot on side 1
    first = bp.arcs[0]
    z, ms = arc_nodes(first, 0, y_index(first.y_end))
    push(z, [("arc", int(m)) for m in ms])
    for j in range(1, 2 * g + 1):
        push(side_nodes[j], [("side", j)] * len(side_nodes[j]))
        if j < 2 * g:
            (arc,) = arcs_by_gap[j]
            z, ms = arc_nodes(arc, y_index(arc.y_start), y_index(arc.y_end))
        else:
            (arc,) = arcs_by_gap[2 * g]
            z, ms = arc_nodes(arc, y_index(arc.y_start), n_y // 2)
        push(z, [("arc", int(m)) for m in ms])
    # real axis back to the anchor
    x0 = loop_pts[0].real
    xl = loop_pts[-1].real
    if abs(loop_pts[-1].imag) > 1e-12 or abs(loop_pts[0].imag) > 1e-12:
        raise MeshError("symmetry axis endpoints are off the real line")
    loop_pts[-1] = complex(xl, 0.0)
    loop_pts[0] = complex(x0, 0.0)
    axis = _geodesic_nodes(complex(xl, 0.0), complex(x0, 0.0), h).real
    loop_pts.extend(complex(x, 0.0) for x in axis[1:-1])
    loop_tags.extend([("axis", None)] * (len(axis) - 2))
    return np.array(loop_pts), loop_tags, side_nodes


def _refine(vertices, segments, h, max_iter=12):
    """Constrained Delaunay refinement towards hyperbolic edge length ``h``."""

    def target_area(c):
        he = h * (1.0 - np.sum(c * c, axis=1)) / 2.0
        return math.sqrt(3.0) / 4.0 * he * he

    opts = f"pq{MIN_ANGLE_DEG + 10:g}Y"
    t = triangle.triangulate({"vertices": vertices, "segments": segments}, opts + f"a{target_area(np.zeros((1, 2)))[0]:.3e}")
    for _ in range(max_iter):
        c = t["vertices"][t["triangles"]].mean(axis=1)
        area = 0.5 * np.abs(_signed_area2(t["vertices"], t["triangles"]))
        ta = target_area(c)
        if np.all(area <= 1.05 * ta):
            break
        t = triangle.triangulate(
            {"vertices": t["vertices"], "triangles": t["triangles"], "segments": t["segments"], "triangle_max_area": ta},
            "r" + opts + "a",
        )
    return t["vertices"], t["triangles"]


def build_core_mesh(geo: SurfaceGeometry, h: float, n_y: int | None = None) -> CoreChart:
    if not geo.symmetric:
        raise GeometryError("core mesh requires the symmetric configuration")
    if not h > 0:
        raise DomainError("mesh size must be positive")
    bp = hyperbolic.parametrize_core_boundary(geo, 8)
    if n_y is None:
        n_y = choose_n_y(geo.ell, h, geo.genus)
    if n_y % (8 * geo.genus):
        raise MeshError("n_y must be a multiple of 8 * genus")
    loop, tags, side_nodes = _upper_boundary(geo, bp, n_y, h)
    nb = len(loop)
    verts = np.c_[loop.real, loop.imag]
    segs = np.c_[np.arange(nb), (np.arange(nb) + 1) % nb]
    V, T = _refine(verts, segs, h)
    if not np.array_equal(V[:nb], verts):
        raise MeshError("triangulator moved boundary vertices")
    if np.any(np.abs(V[nb:, 1]) < 1e-13):
        raise MeshError("interior vertex on the symmetry axis")
    up = V[:, 0] + 1j * V[:, 1]

    # reflect
    on_axis = np.zeros(len(up), bool)
    on_axis[:nb] = [t[0] == "axis" or abs(z.imag) == 0.0 for z, t in zip(loop, tags)]
    lower_idx = np.full(len(up), -1)
    nxt = len(up)
    for i in range(len(up)):
        if not on_axis[i]:
            lower_idx[i] = nxt
            nxt += 1
        else:
            lower_idx[i] = i
    pts = np.empty(nxt, complex)
    pts[: len(up)] = up
    pts[lower_idx[~on_axis]] = np.conj(up[~on_axis])
    mirror = np.empty(nxt, int)
    mirror[: len(up)] = lower_idx
    mirror[lower_idx] = np.arange(len(up))
    T_low = lower_idx[T][:, [0, 2, 1]]
    tris = np.vstack([T, T_low])

    # boundary y index
    by = {}
    for i, t in enumerate(tags):
        if t[0] == "arc":
            by[i] = t[1] % n_y
            by[lower_idx[i]] = (-t[1]) % n_y

    # side node indices (upper sides by loop position, lower sides by reflection)
    sides = {}
    g = geo.genus
    for j in range(1, 2 * g + 1):
        ids = _match(side_nodes[j], loop, f"side {j}")
        sides[j] = ids
        # conj(D_j) = D_{4g+1-j}
        sides[4 * g + 1 - j] = lower_idx[ids]
    pairs = []
    for j in range(1, 2 * g + 1):
        src = sides[j]
        dst = sides[j + 2 * g]
        img = geo.generators[j - 1](pts[src])
        k = _match(img, pts[dst], f"pairing S_{j}")
        pairs.extend((int(a), int(dst[b]), j) for a, b in zip(src, k))

    chart = CoreChart(pts, tris, by, sides, pairs, mirror, n_y, geo)
    _check_quality(np.c_[pts.real, pts.imag], tris)
    return chart


def _check_quality(pts2, tris):
    if np.any(_signed_area2(pts2, tris) <= 0):
        raise MeshError("negatively oriented triangle")
    m = _min_angles(pts2, tris).min()
    if m <= MIN_ANGLE_DEG:
        raise MeshError(f"minimum angle {m:.1f} deg below {MIN_ANGLE_DEG}; try a smaller h")


def core_hyperbolic_area(chart: CoreChart) -> float:
    p = chart.points[chart.triangles]
    mids = np.stack([(p[:, 0] + p[:, 1]) / 2, (p[:, 1] + p[:, 2]) / 2, (p[:, 2] + p[:, 0]) / 2], axis=1)
    w = 4.0 / (1.0 - np.abs(mids) ** 2) ** 2
    pts2 = np.c_[chart.points.real, chart.points.imag]
    area = 0.5 * _signed_area2(pts2, chart.triangles)
    return float(np.sum(area * w.mean(axis=1)))


def core_euler_characteristic(chart: CoreChart) -> int:
    """Euler characteristic of the core after the side pairings."""
    n = len(chart.points)
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b, _ in chart.side_pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    t = np.sort(roots[chart.triangles], axis=1)
    edges = np.unique(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [0, 2]]]), axis=0)
    return int(len(np.unique(roots)) - len(edges) + len(t))


# ---------------------------------------------------------------------------
# end chart
# ---------------------------------------------------------------------------


def radial_grid(L: float, h: float, breaks=()) -> np.ndarray:
    knots = sorted({0.0, float(L), *[float(b) for b in breaks if 0.0 < b < L]})
    parts = [np.array([0.0])]
    for a, b in zip(knots[:-1], knots[1:]):
        n = max(1, math.ceil((b - a) / h - 1e-9))
        parts.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(parts)


def build_end_mesh(ell: float, L: float, h: float, n_y: int | None = None, breaks=(), genus: int = 1) -> EndChart:
    """Structured triangulation of ``[0, L] x R/ell Z``.

    ``breaks`` (e.g. the profile's ``r0`` and ``R``) are forced onto the
    radial grid.  Diagonals are mirrored between ``y`` and ``-y`` so the
    triangulation itself is invariant under the reflection.
    """
    if not (ell > 0 and L > 0 and h > 0):
        raise DomainError("ell, L, h must be positive")
    if n_y is None:
        n_y = choose_n_y(ell, h, genus)
    if n_y % 2:
        raise MeshError("n_y must be even")
    r = radial_grid(L, h, breaks)
    dy = ell / n_y
    R_, Y_ = np.meshgrid(r, np.arange(n_y) * dy, indexing="ij")
    pts = np.c_[R_.ravel(), Y_.ravel()]
    n_r = len(r) - 1
    ir, iy = np.meshgrid(np.arange(n_r), np.arange(n_y), indexing="ij")
    ir, iy = ir.ravel(), iy.ravel()
    a = ir * n_y + iy
    b = (ir + 1) * n_y + iy
    c = (ir + 1) * n_y + (iy + 1) % n_y
    d = ir * n_y + (iy + 1) % n_y
    lower = iy < n_y // 2
    # (r, y) counterclockwise: a=(r,y), b=(r+dr,y), c=(r+dr,y+dy), d=(r,y+dy)
    t1 = np.where(lower[:, None], np.c_[a, b, c], np.c_[a, b, d])
    t2 = np.where(lower[:, None], np.c_[a, c, d], np.c_[b, c, d])
    tris = np.vstack([t1, t2])
    chart = EndChart(r, n_y, ell, pts, tris)
    # orientation with the periodic wrap unrolled
    p = _unwrapped(chart, tris)
    if np.any(_signed_area2(p.reshape(-1, 2), np.arange(p.shape[0] * 3).reshape(-1, 3)) <= 0):
        raise MeshError("negatively oriented end triangle")
    return chart


def _unwrapped(chart: EndChart, tris: np.ndarray) -> np.ndarray:
    """Triangle vertex coordinates with the periodic seam undone."""
    p = chart.points[tris].copy()
    y = p[..., 1]
    span = y.max(axis=1, keepdims=True) - y.min(axis=1, keepdims=True)
    wrap = span > chart.ell / 2
    y[wrap & (y < chart.ell / 2)] += chart.ell
    p[..., 1] = y
    return p


def end_element_geometry(chart: EndChart, tris=None) -> np.ndarray:
    return _unwrapped(chart, chart.triangles if tris is None else tris)


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------


def glue(core: CoreChart | None, end: EndChart, h: float) -> GluedMesh:
    nc = 0 if core is None else len(core.points)
    ne = end.n_nodes
    N = nc + ne
    parent = np.arange(N)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    side_pairs = []
    iface = []
    if core is not None:
        if core.n_y != end.n_y:
            raise MeshError("core and end charts disagree on the y grid")
        for a, b, s in core.side_pairs:
            union(a, b)
            side_pairs.append((a, b, s))
        for node, m in sorted(core.boundary_y_index.items()):
            e = nc + int(end.node(0, m))
            union(node, e)
            iface.append((node, e))
    roots = np.array([find(i) for i in range(N)])
    uniq, first = np.unique(roots, return_index=True)
    order = np.argsort(first)
    relabel = np.empty(len(uniq), int)
    relabel[order] = np.arange(len(uniq))
    dof = relabel[np.searchsorted(uniq, roots)]
    n_dof = len(uniq)

    # involution on raw nodes, then on dofs
    jraw = np.empty(N, int)
    if core is not None:
        jraw[:nc] = core.mirror
    ir = np.arange(ne) // end.n_y
    iy = np.arange(ne) % end.n_y
    jraw[nc:] = nc + end.node(ir, -iy)
    sym = np.full(n_dof, -1)
    sym[dof] = dof[jraw]
    if np.any(sym[dof] != dof[jraw]) or np.any(sym[sym] != np.arange(n_dof)):
        raise MeshError("reflection is not compatible with the identifications")

    pts = np.zeros((N, 2))
    chart = np.zeros(N, np.int8)
    if core is not None:
        pts[:nc] = np.c_[core.points.real, core.points.imag]
    pts[nc:] = end.points
    chart[nc:] = END
    tris = [end.triangles + nc]
    tchart = [np.full(len(end.triangles), END, np.int8)]
    if core is not None:
        tris.insert(0, core.triangles)
        tchart.insert(0, np.full(len(core.triangles), CORE, np.int8))
    tris = np.vstack(tris)
    tchart = np.concatenate(tchart)
    dt = dof[tris]
    if np.any((dt[:, 0] == dt[:, 1]) | (dt[:, 1] == dt[:, 2]) | (dt[:, 0] == dt[:, 2])):
        raise MeshError("identification collapsed a triangle")
    trunc = np.unique(dof[nc + end.node(len(end.r) - 1, np.arange(end.n_y))])
    return GluedMesh(
        points=pts,
        chart=chart,
        triangles=tris,
        tri_chart=tchart,
        dof=dof,
        n_dof=n_dof,
        side_pairs=np.array(side_pairs, dtype=int).reshape(-1, 3),
        interface_pairs=np.array(iface, dtype=int).reshape(-1, 2),
        symmetry=sym,
        fixed=np.flatnonzero(sym == np.arange(n_dof)),
        truncation=trunc,
        h=h,
        L=float(end.r[-1]),
        ell=end.ell,
        genus=0 if core is None else core.geo.genus,
        n_y=end.n_y,
    )


def build_glued_mesh(geo: SurfaceGeometry, profile, h: float, L: float, h_end: float | None = None) -> GluedMesh:
    """Core chart + end chart of length ``L`` glued along the core boundary."""
    if L < profile.R:
        raise DomainError("truncation length must be at least the profile's R")
    core = build_core_mesh(geo, h)
    end = build_end_mesh(geo.ell, L, h if h_end is None else h_end, n_y=core.n_y, breaks=(profile.r0, profile.R))
    return glue(core, end, h)
