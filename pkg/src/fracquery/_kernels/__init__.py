"""Hot simulation kernels: compiled extension with a pure-Python fallback.

``simulate_runs`` drives batches of axis-aligned jump processes for the
strategy/stopping combinations that appear in tight Monte-Carlo loops.  The
compiled Cython version and the pure version consume randomness identically
and produce bit-identical outputs; which one is active is decided at import.
Set ``FRACQUERY_PURE=1`` to force the pure path (the benchmark uses this).
"""

from __future__ import annotations

import os

from . import _fallback
from ._codes import (
    DET_ALL_FROZEN,
    DET_AND,
    DET_OR,
    DET_TABLE,
    STATUS_CAP_FAULT,
    STATUS_FROZEN,
    STATUS_TRUNCATED,
    STRAT_DP_POLICY,
    STRAT_MAX_DERIV,
    STRAT_MIDDLE,
    STRAT_RANDOM,
    STRAT_S_MAX,
)

if os.environ.get("FRACQUERY_PURE"):
    _impl = _fallback
    COMPILED = False
else:
    try:
        from . import _speedups as _impl

        COMPILED = True
    except ImportError:
        _impl = _fallback
        COMPILED = False

simulate_runs = _impl.simulate_runs

__all__ = [
    "simulate_runs",
    "COMPILED",
    "STRAT_S_MAX",
    "STRAT_RANDOM",
    "STRAT_DP_POLICY",
    "STRAT_MAX_DERIV",
    "STRAT_MIDDLE",
    "DET_TABLE",
    "DET_OR",
    "DET_AND",
    "DET_ALL_FROZEN",
    "STATUS_TRUNCATED",
    "STATUS_FROZEN",
    "STATUS_CAP_FAULT",
]
