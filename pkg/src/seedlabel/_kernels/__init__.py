"""Kernel backend selection.

The hot inner loops (greedy gains, pairwise dots, vote-evidence
accumulation) exist twice: a numba-jitted version and a pure-numpy
fallback.  The active backend is chosen once at import time from the
``SEEDLABEL_BACKEND`` environment variable:

* unset or ``auto`` -- numba if importable, else numpy;
* ``numba``         -- numba, raising if it is not installed;
* ``numpy``         -- the pure-numpy fallback, even if numba is present.

``benchmarks/bench_backends.py`` compares the two implementations head to
head; within one backend all kernels are deterministic and the scalar entry
points are bitwise consistent with their batched counterparts.
"""

import os

from . import numpy_backend

_requested = os.environ.get("SEEDLABEL_BACKEND", "auto").strip().lower() or "auto"

if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"SEEDLABEL_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend

        _impl = numba_backend
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _impl = numpy_backend
        BACKEND = "numpy"


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND


fl_gains = _impl.fl_gains
fl_gain_col = _impl.fl_gain_col
row_dots = _impl.row_dots
row_sq = _impl.row_sq
pairwise_dots = _impl.pairwise_dots
evidence_logits = _impl.evidence_logits
