"""P1 assembly on the glued mesh, symmetry-sector reduction, shift-invert eigensolve."""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import kernels
from .errors import AssemblyError, SolverError
from .mesh import CORE, END, GluedMesh

log = logging.getLogger(__name__)

SECTORS = ("odd", "even", "full")
DEFAULT_TOL = 1e-8
DEFAULT_SEED = 20200101
# strictly negative so the Neumann full-sector stiffness (constants in its kernel) factors
DEFAULT_SHIFT = -1e-2


def hyperbolic_weight(z):
    return 4.0 / (1.0 - np.abs(z) ** 2) ** 2


def assemble(mesh: GluedMesh, profile) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Stiffness ``A`` and mass ``M`` on the degrees of freedom of ``mesh``.

    Core elements use the flat stiffness (conformal invariance) and the
    hyperbolic weight at edge midpoints for the mass.  End elements carry
    ``sqrt(F) u_r^2 + u_y^2 / sqrt(F)`` and mass density ``sqrt(F)`` with
    ``F`` at the centroid.
    """
    rows, cols, av, mv = [], [], [], []
    core = mesh.tri_chart == CORE
    if np.any(core):
        tc = mesh.triangles[core]
        z = mesh.points[:, 0] + 1j * mesh.points[:, 1]
        p = z[tc]
        mids = np.stack([(p[:, 0] + p[:, 1]) / 2, (p[:, 1] + p[:, 2]) / 2, (p[:, 2] + p[:, 0]) / 2], axis=1)
        one = np.ones(len(tc))
        r, c, a, m = kernels.p1_assemble(mesh.points, tc, one, one, hyperbolic_weight(mids))
        rows.append(r), cols.append(c), av.append(a), mv.append(m)
    end = mesh.tri_chart == END
    if np.any(end):
        te = mesh.triangles[end]
        geom = end_element_geometry_from_mesh(mesh, te)
        rc = geom[:, :, 0].mean(axis=1)
        sF = np.sqrt(profile.F(rc))
        local = np.arange(3 * len(te)).reshape(-1, 3)
        r, c, a, m = kernels.p1_assemble(geom.reshape(-1, 2), local, sF, 1.0 / sF, np.repeat(sF[:, None], 3, axis=1))
        # map local element-vertex ids back to raw nodes
        r, c = te.ravel()[r], te.ravel()[c]
        rows.append(r), cols.append(c), av.append(a), mv.append(m)
    rows = mesh.dof[np.concatenate(rows)]
    cols = mesh.dof[np.concatenate(cols)]
    n = mesh.n_dof
    A = sp.coo_matrix((np.concatenate(av), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((np.concatenate(mv), (rows, cols)), shape=(n, n)).tocsr()
    if not (np.all(np.isfinite(A.data)) and np.all(np.isfinite(M.data))):
        raise AssemblyError("non-finite matrix entries")
    A = (A + A.T) * 0.5
    M = (M + M.T) * 0.5
    return A.tocsr(), M.tocsr()


def end_element_geometry_from_mesh(mesh: GluedMesh, tris: np.ndarray) -> np.ndarray:
    """(T, 3, 2) end-chart vertex coordinates with the periodic seam undone."""
    p = mesh.points[tris].copy()
    y = p[..., 1]
    span = y.max(axis=1, keepdims=True) - y.min(axis=1, keepdims=True)
    wrap = span > mesh.ell / 2
    y[wrap & (y < mesh.ell / 2)] += mesh.ell
    p[..., 1] = y
    return p


def sector_basis(mesh: GluedMesh, sector: str, dirichlet=()) -> sp.csr_matrix:
    """Columns spanning the sector: ``u = P c``.

    odd: one column per symmetry pair ``(d, J d)`` with entries ``+1, -1``;
    fixed-set nodes are forced to zero.  even: ``+1, +1`` per pair plus one
    column per fixed node.  full: identity.  Dirichlet dofs are dropped.
    """
    if sector not in SECTORS:
        raise ValueError(f"unknown sector {sector!r}")
    n = mesh.n_dof
    drop = np.zeros(n, bool)
    drop[np.asarray(dirichlet, dtype=int)] = True
    if sector == "full":
        keep = np.flatnonzero(~drop)
        return sp.csr_matrix((np.ones(len(keep)), (keep, np.arange(len(keep)))), shape=(n, len(keep)))
    d = np.arange(n)
    J = mesh.symmetry
    pairs = d[(d < J) & ~drop]
    rows = [pairs, J[pairs]]
    vals = [np.ones(len(pairs)), np.full(len(pairs), -1.0 if sector == "odd" else 1.0)]
    colix = [np.arange(len(pairs)), np.arange(len(pairs))]
    ncol = len(pairs)
    if sector == "even":
        fixed = d[(d == J) & ~drop]
        rows.append(fixed)
        vals.append(np.ones(len(fixed)))
        colix.append(ncol + np.arange(len(fixed)))
        ncol += len(fixed)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(colix))), shape=(n, ncol))


def apply_sector(A, M, mesh: GluedMesh, sector: str, dirichlet=()):
    """Reduced ``(A_s, M_s, P)`` with ``A_s = P^T A P``."""
    P = sector_basis(mesh, sector, dirichlet)
    A_s = (P.T @ A @ P).tocsc()
    M_s = (P.T @ M @ P).tocsc()
    return A_s, M_s, P


def restrict_vector(u: np.ndarray, P: sp.csr_matrix) -> np.ndarray:
    """Coefficients ``c`` with ``P c = u`` for ``u`` in the range of ``P``."""
    return (P.T @ u) / np.asarray(P.multiply(P).sum(axis=0)).ravel()


def rayleigh_quotient(A, M, c) -> float:
    return float(c @ (A @ c) / (c @ (M @ c)))


def solve_smallest(A_s, M_s, k: int = 6, tol: float = DEFAULT_TOL, sigma: float = DEFAULT_SHIFT, seed: int = DEFAULT_SEED):
    """``k`` smallest eigenpairs of ``A v = lambda M v`` by shift-invert Lanczos.

    Returns ``(eigenvalues, eigenvectors, residuals)`` in ascending order with
    residual ``||A v - lambda M v|| / ||M v||``.
    """
    n = A_s.shape[0]
    k = min(k, n - 2)
    if k < 1:
        raise SolverError("problem too small", residuals=None)
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        lam, V = eigsh(A_s, k=k, M=M_s, sigma=sigma, which="LM", v0=v0, tol=0.0, maxiter=10_000)
    except Exception as exc:  # ArpackNoConvergence, factorization failures
        raise SolverError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(lam)
    lam, V = lam[order], V[:, order]
    MV = M_s @ V
    res = np.linalg.norm(A_s @ V - MV * lam, axis=0) / np.linalg.norm(MV, axis=0)
    if np.any(res > tol):
        raise SolverError(f"residuals above tolerance {tol}: {res.max():.2e}", residuals=res)
    return lam, V, res
