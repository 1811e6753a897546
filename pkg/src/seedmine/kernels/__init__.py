"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when importable; set
``SEEDMINE_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
active implementation.
"""

import os

if os.environ.get("SEEDMINE_PURE_PYTHON"):
    from . import _fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "python"

dilate_mask = _impl.dilate_mask
confusion_counts = _impl.confusion_counts

__all__ = ["BACKEND", "dilate_mask", "confusion_counts"]
