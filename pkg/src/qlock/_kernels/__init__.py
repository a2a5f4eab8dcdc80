"""Hot enumeration kernels with a compiled implementation and a numpy fallback.

The compiled extension is used when it imports; set ``QLOCK_PURE_PYTHON=1``
to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("QLOCK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ext as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

hash_inputs = _impl.hash_inputs
accumulate_law = _impl.accumulate_law
eta_sweep = _impl.eta_sweep
locking_sweep = _impl.locking_sweep

__all__ = ["BACKEND", "accumulate_law", "eta_sweep", "hash_inputs", "locking_sweep"]
