"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback keeps
the package fully functional without a compiler. RECSCORE_BACKEND=cython or
=python forces the choice (cython raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_choice = os.environ.get("RECSCORE_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "cython", "python"):
    raise ImportError(
        f"RECSCORE_BACKEND must be 'auto', 'cython' or 'python', got {_choice!r}"
    )

if _choice == "python":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _choice == "cython":
            raise
        kernels = _kernels_py

BACKEND = kernels.BACKEND_NAME
solve_penalized = kernels.solve_penalized
sirs_statistic = kernels.sirs_statistic
