"""Kernel backend selection.

The compiled extension ``_core`` is preferred when present; otherwise the
NumPy fallback is used.  Set ``KRYLOVLP_PURE=1`` to force the fallback (used
by the benchmark and the backend-agreement tests).
"""

import os

_FORCE_PURE = os.environ.get("KRYLOVLP_PURE", "").strip().lower() in {"1", "true", "yes"}

if _FORCE_PURE:
    from . import fallback as _backend

    HAVE_COMPILED = False
else:
    try:
        from . import _core as _backend  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        from . import fallback as _backend

        HAVE_COMPILED = False

BACKEND_NAME = "compiled" if HAVE_COMPILED else "python"

csr_matvec = _backend.csr_matvec
csr_matvec_t = _backend.csr_matvec_t
csr_solve_lower = _backend.csr_solve_lower
qr_rank1_update = _backend.qr_rank1_update
linf_ratio_test = _backend.linf_ratio_test
l1_ratio_pos_min = _backend.l1_ratio_pos_min
l1_ratio_neg_max = _backend.l1_ratio_neg_max
