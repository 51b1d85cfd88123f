"""Kernel selection: compiled extension when available, numpy otherwise.

Set GENDERLENS_PURE_PYTHON=1 to force the numpy path (used by the benchmark
and the backend-equivalence tests).
"""

import os

if os.environ.get("GENDERLENS_PURE_PYTHON"):
    from ._em_py import em_pass

    BACKEND = "python"
else:
    try:
        from ._em_cy import em_pass

        BACKEND = "cython"
    except ImportError:
        from ._em_py import em_pass

        BACKEND = "python"

__all__ = ["em_pass", "BACKEND"]
