"""Split-kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
numerically interchangeable. Set SRQA_FORCE_NUMPY_SPLIT=1 to force the
fallback (used by the benchmark and for debugging).
"""

import os

if os.environ.get("SRQA_FORCE_NUMPY_SPLIT") == "1":
    from srqa.regress import _split_np as _impl

    BACKEND = "numpy"
else:
    try:
        from srqa.regress import _splitkern as _impl

        BACKEND = "compiled"
    except ImportError:
        from srqa.regress import _split_np as _impl

        BACKEND = "numpy"

best_split = _impl.best_split
