"""Compare the compiled and NumPy P1 assembly kernels on a glued mesh.

Run:  python benchmarks/bench_assembly.py [h] [repeats]
"""

import math
import sys
import timeit

import numpy as np

from cylend import _kernels_py, hyperbolic, mesh, profile

try:
    from cylend import _kernels
except ImportError:  # extension not built
    _kernels = None


def inputs(h):
    geo = hyperbolic.make_geometry(1, math.pi / 6)
    prof = profile.make_profile(1.0, 3.0, geo.ell)
    gm = mesh.build_glued_mesh(geo, prof, h, 8.0)
    core = gm.tri_chart == mesh.CORE
    tris = gm.triangles[core]
    z = gm.points[:, 0] + 1j * gm.points[:, 1]
    p = z[tris]
    mids = np.stack([(p[:, 0] + p[:, 1]) / 2, (p[:, 1] + p[:, 2]) / 2, (p[:, 2] + p[:, 0]) / 2], axis=1)
    mw = 4.0 / (1.0 - np.abs(mids) ** 2) ** 2
    one = np.ones(len(tris))
    return gm.points, np.ascontiguousarray(tris, dtype=np.int64), one, one, np.ascontiguousarray(mw)


def main(h=0.02, repeats=5):
    args = inputs(h)
    print(f"core triangles: {len(args[1])}")
    t_py = min(timeit.repeat(lambda: _kernels_py.p1_assemble(*args), number=1, repeat=repeats))
    print(f"numpy   : {t_py * 1e3:8.2f} ms")
    if _kernels is None:
        print("cython  : not built")
        return
    t_cy = min(timeit.repeat(lambda: _kernels.p1_assemble(*args), number=1, repeat=repeats))
    a = _kernels_py.p1_assemble(*args)
    b = _kernels.p1_assemble(*args)
    diff = max(float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float)))) for x, y in zip(a, b))
    print(f"cython  : {t_cy * 1e3:8.2f} ms  (speedup {t_py / t_cy:.1f}x, max |diff| {diff:.1e})")


if __name__ == "__main__":
    main(*(float(v) for v in sys.argv[1:2]), *(int(v) for v in sys.argv[2:3]))
