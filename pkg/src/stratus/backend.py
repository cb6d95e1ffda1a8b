"""Progress-kernel backend selection.

The compiled extension is preferred when importable; otherwise the
pure-Python twin is used. Set STRATUS_PURE_PYTHON=1 to force the
fallback (the benchmark uses this to compare both).
"""

import os

if os.environ.get("STRATUS_PURE_PYTHON"):
    from . import _speedups_py as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _speedups_py as _impl

advance_equal = _impl.advance_equal
min_active = _impl.min_active


def backend_name() -> str:
    return _impl.BACKEND
