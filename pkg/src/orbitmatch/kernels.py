"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is. Setting ``ORBITMATCH_PURE=1`` forces the fallback.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("ORBITMATCH_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # pragma: no cover - depends on the build
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "compiled" if compiled_backend is not None else "python"

decode_windows = backend.decode_windows
min_curve = backend.min_curve
stream_min_curve = backend.stream_min_curve
stream_count_below = backend.stream_count_below
count_pairs_1d = backend.count_pairs_1d
count_pairs_grid = backend.count_pairs_grid
