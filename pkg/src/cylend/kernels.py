"""Element-kernel backend selection.

The compiled extension is used when it was built; set ``CYLEND_PURE_PYTHON=1``
to force the NumPy implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
p1_assemble = _kernels_py.p1_assemble

if os.environ.get("CYLEND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        p1_assemble = _kernels.p1_assemble
        BACKEND = "cython"
