"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python implementation
when the extension is unavailable.  ``BACKEND`` records which one is active.
Set the environment variable ``QPFDYN_PURE=1`` to force the fallback (used
by the benchmark suite).
"""

from __future__ import annotations

import os

if os.environ.get("QPFDYN_PURE"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

advance = _impl.advance
advance_lyap = _impl.advance_lyap
advance_backward = _impl.advance_backward
lift_series = _impl.lift_series
orbit_samples = _impl.orbit_samples
orbit_samples_backward = _impl.orbit_samples_backward
deriv_orbit = _impl.deriv_orbit
graph_forward = _impl.graph_forward
graph_backward = _impl.graph_backward
grid_eval = _impl.grid_eval
