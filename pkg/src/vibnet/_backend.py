"""Selects the compiled kernels when available, else the numpy fallback.

Override with VIBNET_BACKEND=python or VIBNET_BACKEND=compiled (the latter
raises if the extension was not built).
"""

import os

_forced = os.environ.get("VIBNET_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _pykernels as impl
elif _forced == "compiled":
    from . import _kernels as impl  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _kernels as impl
    except ImportError:
        from . import _pykernels as impl


def backend_name() -> str:
    return impl.BACKEND_NAME
