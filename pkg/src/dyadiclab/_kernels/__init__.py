"""Walk-kernel backend selection.

The compiled extension is preferred when importable; the numpy reference
backend is a drop-in replacement producing bit-identical results.  Set
DYADICLAB_BACKEND=python (or =compiled) to force a choice; forcing the
compiled backend raises if the extension is missing.
"""

from __future__ import annotations

import os

from . import _walk_ref

_requested = os.environ.get("DYADICLAB_BACKEND", "auto").strip().lower()

if _requested in ("auto", "", "compiled", "fast"):
    try:
        from . import _walk_fast as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested in ("compiled", "fast"):
            raise
        _impl = _walk_ref
        BACKEND = "python"
elif _requested in ("python", "ref", "pure"):
    _impl = _walk_ref
    BACKEND = "python"
else:
    raise RuntimeError(f"unknown DYADICLAB_BACKEND value {_requested!r}")

linear_ensemble = _impl.linear_ensemble
general_ensemble = _impl.general_ensemble

# reference-only diagnostics (never performance critical)
coarse_increment_stats = _walk_ref.coarse_increment_stats
coarse_trace = _walk_ref.coarse_trace


def backend_name() -> str:
    return BACKEND


def get_backend(name: str):
    """Explicit backend module, for equivalence tests and benchmarks."""
    if name == "python":
        return _walk_ref
    if name == "compiled":
        from . import _walk_fast

        return _walk_fast
    raise ValueError(f"unknown backend {name!r}")
