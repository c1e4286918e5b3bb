"""Selects the compiled kernels when available, else the numpy fallback.

Set ``HSFRAC_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the backend-agreement tests).
"""

import os

from . import _pycore

NAME = "python"
gk15_reduce = _pycore.gk15_reduce
profile_batch = _pycore.profile_batch

if os.environ.get("HSFRAC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core
    except ImportError:  # extension not built
        _core = None
    if _core is not None:
        NAME = "compiled"
        gk15_reduce = _core.gk15_reduce
        profile_batch = _core.profile_batch


def compiled_module():
    """Return the compiled module or None, regardless of the override."""
    try:
        from . import _core as mod
    except ImportError:
        return None
    return mod
