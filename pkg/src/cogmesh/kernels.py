"""Backend dispatch for the computational kernels.

The compiled extension is preferred when importable; setting COGMESH_PURE=1
in the environment forces the pure Python reference backend.  Both expose
the same three functions with identical semantics, and the simulator draws
identical random streams under either backend.
"""

import os

from . import _reference

if os.environ.get("COGMESH_PURE"):
    _impl = _reference
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _reference


def backend_name() -> str:
    return "reference" if _impl is _reference else "compiled"


share_expectation = _impl.share_expectation
contention_distribution = _impl.contention_distribution
simulate_counts = _impl.simulate_counts
