"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built; set ``BOSESEP_PURE_PYTHON=1``
to force the fallback.  ``BACKEND`` names the active implementation.
"""

import os

from . import _pure

if os.environ.get("BOSESEP_PURE_PYTHON", "") not in ("", "0"):
    _ext = None
else:
    try:
        from . import _ext
    except ImportError:
        _ext = None

if _ext is not None:
    ascend = _ext.ascend
    BACKEND = "cython"
else:
    ascend = _pure.ascend
    BACKEND = "python"

evaluate = _pure.evaluate

__all__ = ["ascend", "evaluate", "BACKEND"]
