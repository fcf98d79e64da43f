"""Vectorized NumPy P1 element kernels (fallback for the compiled module)."""

import numpy as np

# barycentric values at the edge midpoints m01, m12, m20
_MID = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


def p1_assemble(pts, tris, kxx, kyy, mw):
    """COO triplets of P1 stiffness and mass for a diagonal conductivity.

    Parameters
    ----------
    pts : (N, 2) float array
    tris : (T, 3) int array, counterclockwise
    kxx, kyy : (T,) float arrays
        Diagonal conductivity per element.
    mw : (T, 3) float array
        Mass density at the three edge midpoints (m01, m12, m20).

    Returns
    -------
    rows, cols, a_vals, m_vals : arrays of length 9 T
    """
    pts = np.asarray(pts, dtype=np.float64)
    tris = np.asarray(tris, dtype=np.int64)
    p = pts[tris]
    x, y = p[..., 0], p[..., 1]
    area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    bx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1) / area2[:, None]
    by = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1) / area2[:, None]
    area = 0.5 * area2
    A = area[:, None, None] * (
        kxx[:, None, None] * bx[:, :, None] * bx[:, None, :] + kyy[:, None, None] * by[:, :, None] * by[:, None, :]
    )
    M = (area / 3.0)[:, None, None] * np.einsum("tq,qi,qj->tij", mw, _MID, _MID)
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    return rows, cols, A.ravel(), M.ravel()
