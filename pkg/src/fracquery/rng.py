"""Counter-based random streams keyed by (master seed, run index, stream).

Philox is a counter-mode generator, so every run of a Monte-Carlo experiment
owns an independent stream that is reproducible without any sequential state
handoff between runs.  Stream tags separate the main step randomness from
auxiliary draws (strategy-internal choices, completion sampling) so the two
never interleave.
"""

from __future__ import annotations

import numpy as np

STREAM_SLOTS = 4

STREAM_STEP = 0
STREAM_STRATEGY = 1
STREAM_COMPLETION = 2


def stream(master_seed, run_index, tag=STREAM_STEP):
    """Generator for one (seed, run, tag) triple; draws never collide."""
    key = np.array(
        [np.uint64(master_seed), np.uint64(run_index * STREAM_SLOTS + tag)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))
