"""End-to-end odd-sector spectrum: mesh, assemble, reduce, solve, bracket the truncation."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fem, hyperbolic, mesh, profile as profile_mod
from .certificate import TestFunction, im_zk
from .errors import ConfigError, DomainError

log = logging.getLogger(__name__)

AUTO_L_TOL = 1e-8
PILOT_EXTRA = 6.0  # pilot truncation R + PILOT_EXTRA used to estimate the decay rate
L_MAX = 60.0
K_MAX = 64


@dataclass
class SpectrumReport:
    sector: str
    bc: str
    eigenvalues: list
    residuals: list
    threshold: float
    count_below_threshold: int
    h: float
    L: float
    tol: float
    k: int
    n_dof: int
    n_reduced: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SpectrumResult:
    """Both truncations at the resolved ``L`` plus the ``L``-convergence sequence."""

    genus: int
    alpha: float
    alpha_prime: float
    ell: float
    threshold: float
    primary: SpectrumReport
    dirichlet: SpectrumReport
    neumann: SpectrumReport
    L: float
    L_resolution: str
    decay_rate: float | None
    bracket_width: float | None
    bracket_estimate: float | None
    L_sequence: list = field(default_factory=list)
    test_function: str = ""
    test_function_rayleigh: float | None = None
    warnings: list = field(default_factory=list)

    @property
    def count_below_threshold(self) -> int:
        return self.primary.count_below_threshold

    @property
    def lambda_min(self) -> float:
        return self.primary.eigenvalues[0]

    def to_dict(self) -> dict:
        return asdict(self)


def interpolate_test_function(gm: mesh.GluedMesh, phi: TestFunction) -> np.ndarray:
    """Nodal interpolant on the dofs; ``phi`` vanishes outside the core chart."""
    u = np.zeros(gm.n_dof)
    core = gm.chart == mesh.CORE
    z = gm.points[core, 0] + 1j * gm.points[core, 1]
    u[gm.dof[core]] = phi(z)
    return u


def _solve(A, M, gm, sector, bc, k, tol, grow=True):
    dirichlet = gm.truncation if bc == "dirichlet" else ()
    A_s, M_s, P = fem.apply_sector(A, M, gm, sector, dirichlet)
    while True:
        lam, V, res = fem.solve_smallest(A_s, M_s, k=k, tol=tol)
        if not grow or k >= K_MAX or k >= A_s.shape[0] - 2:
            break
        thr = profile_mod.mode_threshold(1, gm.ell)
        if np.sum(lam < thr) < len(lam):
            break
        k *= 2  # every computed eigenvalue is below threshold: the count is only a lower bound
    return lam, V, res, P, A_s, M_s


def _report(lam, res, gm, sector, bc, tol, n_red) -> SpectrumReport:
    thr = profile_mod.mode_threshold(1, gm.ell)
    return SpectrumReport(
        sector=sector,
        bc=bc,
        eigenvalues=[float(x) for x in lam],
        residuals=[float(x) for x in res],
        threshold=thr,
        count_below_threshold=int(np.sum(lam < thr)),
        h=gm.h,
        L=gm.L,
        tol=tol,
        k=len(lam),
        n_dof=gm.n_dof,
        n_reduced=n_red,
    )


class _Problem:
    """Core chart built once; end chart rebuilt per truncation length."""

    def __init__(self, geo, prof, h):
        self.geo, self.prof, self.h = geo, prof, h
        self.core = mesh.build_core_mesh(geo, h)

    def system(self, L):
        if L < self.prof.R:
            raise DomainError("truncation length must be at least the profile's R")
        end = mesh.build_end_mesh(self.geo.ell, L, self.h, n_y=self.core.n_y, breaks=(self.prof.r0, self.prof.R))
        gm = mesh.glue(self.core, end, self.h)
        A, M = fem.assemble(gm, self.prof)
        return gm, A, M


def _resolve_L(L, sector, R, thr, ell, pilot_solve):
    notes = []
    if not isinstance(L, str):
        return float(L), "fixed", notes
    if L != "auto":
        raise ConfigError(f"L must be a number or 'auto', got {L!r}")
    if sector != "odd":
        raise ConfigError("L = 'auto' needs the odd sector (the only one with a positive cutoff)")
    L_pilot = R + PILOT_EXTRA
    lam_p = pilot_solve(L_pilot)
    if lam_p[0] >= thr:
        how = "auto: no eigenvalue below threshold at the pilot length; pilot length kept"
        notes.append(how)
        return L_pilot, how, notes
    L_res = profile_mod.truncation_length(float(lam_p[0]), ell, R, AUTO_L_TOL)
    if L_res > L_MAX:
        notes.append(f"auto L = {L_res:.3f} capped at {L_MAX}")
        L_res = L_MAX
    return max(L_res, R), "auto: decay rate of the pilot eigenvalue", notes


def resolve_truncation(genus, alpha, alpha_prime=None, r0=profile_mod.DEFAULT_R0, R=profile_mod.DEFAULT_R, L="auto",
                       h=0.05, k=6, tol=fem.DEFAULT_TOL, sector="odd"):
    """``(L, how, notes)`` exactly as :func:`compute_spectrum` resolves it."""
    geo = hyperbolic.make_geometry(genus, alpha, alpha_prime)
    prof = profile_mod.make_profile(r0, R, geo.ell)
    thr = profile_mod.mode_threshold(1, geo.ell)
    if not isinstance(L, str):
        return _resolve_L(L, sector, R, thr, geo.ell, None)
    prob = _Problem(geo, prof, h)

    def pilot(Lv):
        gm, A, M = prob.system(Lv)
        return _solve(A, M, gm, sector, "dirichlet", k, tol)[0]

    return _resolve_L(L, sector, R, thr, geo.ell, pilot)


def compute_spectrum(
    genus: int = 1,
    alpha: float = math.pi / 6,
    alpha_prime: float | None = None,
    r0: float = profile_mod.DEFAULT_R0,
    R: float = profile_mod.DEFAULT_R,
    L="auto",
    h: float = 0.05,
    k: int = 6,
    tol: float = fem.DEFAULT_TOL,
    sector: str = "odd",
    bc: str = "dirichlet",
    phi: TestFunction | None = None,
    l_sequence: bool = True,
) -> tuple[SpectrumResult, dict]:
    """Run the pipeline; returns the result and the final ``(mesh, P, V)`` for export.

    ``L = "auto"`` solves once at a pilot length, takes the decay rate of the
    lowest odd eigenvalue against the first transverse cutoff and picks ``L``
    so that the tail ``exp(-2 rate (L - R))`` is below ``1e-8``.  With no
    eigenvalue under the cutoff there is no decay rate; the pilot length is
    kept and a warning is recorded.
    """
    if sector not in fem.SECTORS:
        raise ConfigError(f"unknown sector {sector!r}")
    if bc not in ("dirichlet", "neumann"):
        raise ConfigError(f"unknown boundary condition {bc!r}")
    notes = []
    geo = hyperbolic.make_geometry(genus, alpha, alpha_prime)
    prof = profile_mod.make_profile(r0, R, geo.ell)
    thr = profile_mod.mode_threshold(1, geo.ell)
    prob = _Problem(geo, prof, h)

    cache = {}

    def solve_at(Lv, which):
        key = (round(Lv, 12), which)
        if key not in cache:
            gm, A, M = prob.system(Lv)
            lam, V, res, P, A_s, M_s = _solve(A, M, gm, sector, which, k, tol)
            cache[key] = (gm, lam, V, res, P, A_s, M_s)
        return cache[key]

    def rate_of(lam0):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rate = profile_mod.decay_rate(lam0, 1, geo.ell)
        for w in caught:
            msg = str(w.message)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            notes.append(msg)
        return rate

    L_res, how, auto_notes = _resolve_L(L, sector, R, thr, geo.ell, lambda Lv: solve_at(Lv, "dirichlet")[1])
    notes.extend(auto_notes)

    gm_d, lam_d, _, res_d, P_d, _, _ = solve_at(L_res, "dirichlet")
    gm_n, lam_n, _, res_n, P_n, _, _ = solve_at(L_res, "neumann")
    rep_d = _report(lam_d, res_d, gm_d, sector, "dirichlet", tol, P_d.shape[1])
    rep_n = _report(lam_n, res_n, gm_n, sector, "neumann", tol, P_n.shape[1])

    rate = None
    width = float(abs(lam_d[0] - lam_n[0]))
    estimate = None
    if sector == "odd" and lam_d[0] < thr:
        rate = rate_of(float(lam_d[0]))
        estimate = math.exp(-2.0 * rate * (L_res - R)) + 10.0 * h * h

    seq = []
    if l_sequence:
        if rate is None:
            notes.append("L-sequence skipped: no decay rate (lowest eigenvalue not below threshold)")
        else:
            for m in (0, 2, 4):
                Lm = L_res + m / rate
                lam_m = lam_d if m == 0 else solve_at(Lm, "dirichlet")[1]
                seq.append({"L": Lm, "lambda_min": float(lam_m[0])})

    phi = im_zk(1, 3) if phi is None else phi
    gm_p, _, V_p, _, P_p, A_s, M_s = solve_at(L_res, bc)
    u = interpolate_test_function(gm_p, phi)
    c = fem.restrict_vector(u, P_p)
    rq = fem.rayleigh_quotient(A_s, M_s, c) if np.any(c) else None

    result = SpectrumResult(
        genus=genus,
        alpha=geo.alpha,
        alpha_prime=geo.alpha_prime,
        ell=geo.ell,
        threshold=thr,
        primary=rep_d if bc == "dirichlet" else rep_n,
        dirichlet=rep_d,
        neumann=rep_n,
        L=L_res,
        L_resolution=how,
        decay_rate=rate,
        bracket_width=width,
        bracket_estimate=estimate,
        L_sequence=seq,
        test_function=phi.label,
        test_function_rayleigh=rq,
        warnings=notes,
    )
    return result, {"mesh": gm_p, "P": P_p, "V": V_p}


def write_eigenvector_csv(path, gm: mesh.GluedMesh, P, v: np.ndarray) -> None:
    """One row per degree of freedom: ``node, chart, x, y, value``."""
    u = P @ v
    first = np.full(gm.n_dof, -1)
    # representative raw node of each dof (lowest raw index)
    order = np.argsort(gm.dof, kind="stable")
    d_sorted = gm.dof[order]
    starts = np.r_[0, np.flatnonzero(np.diff(d_sorted)) + 1]
    first[d_sorted[starts]] = order[starts]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "chart", "x", "y", "value"])
        for d in range(gm.n_dof):
            rn = first[d]
            w.writerow([d, "core" if gm.chart[rn] == mesh.CORE else "end", repr(float(gm.points[rn, 0])), repr(float(gm.points[rn, 1])), repr(float(u[d]))])


# ---------------------------------------------------------------------------
# flat cylinder oracle problem
# ---------------------------------------------------------------------------


def flat_cylinder_eigenvalues(ell: float, L: float, h: float, k: int = 5, tol: float = fem.DEFAULT_TOL):
    """End chart alone with ``F = (2 pi)^2`` and Dirichlet at ``r = 0`` and ``r = L``."""
    end = mesh.build_end_mesh(ell, L, h)
    gm = mesh.glue(None, end, h)
    A, M = fem.assemble(gm, profile_mod.FlatProfile(ell))
    walls = np.unique(np.r_[gm.dof[end.node(0, np.arange(end.n_y))], gm.truncation])
    A_s, M_s, _ = fem.apply_sector(A, M, gm, "full", walls)
    lam, _, res = fem.solve_smallest(A_s, M_s, k=k, tol=tol)
    return lam, res


def flat_cylinder_exact(ell: float, L: float, k: int = 5) -> np.ndarray:
    """Smallest ``(pi m / L)^2 + n^2 / ell^2`` with multiplicity (``m >= 1``, ``n`` in Z)."""
    vals = [(math.pi * m / L) ** 2 + n * n / ell**2 for m in range(1, k + 2) for n in range(-k - 1, k + 2)]
    return np.sort(vals)[:k]
