"""Kernel backend selection.

The compiled extension is preferred when importable; `SWM_PURE_PYTHON=1`
forces the numpy reference. Both expose the same functions with identical
numerics, so the choice never affects results, only speed.
"""

import os

if os.environ.get("SWM_PURE_PYTHON") == "1":
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels

        BACKEND = "python"
