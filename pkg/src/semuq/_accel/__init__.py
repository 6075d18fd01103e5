"""Backend selector for the numeric hot loops.

Imports the compiled extension when present, else falls back to the pure
implementations.  Set ``SEMUQ_PURE=1`` to force the pure path regardless.
"""

from __future__ import annotations

import os

from semuq._accel import pure

if os.environ.get("SEMUQ_PURE") == "1":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from semuq._accel import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

calibrate_scalar = _impl.calibrate_scalar
kme_grid = _impl.kme_grid

__all__ = ["BACKEND", "calibrate_scalar", "kme_grid", "pure"]
