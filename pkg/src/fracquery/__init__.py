"""Fractional query algorithms for Boolean functions.

Axis-aligned jump processes on [-1,1]^n, optimal-cost lattice solvers,
the closed-form two-bit OR cost, revealment inequality checkers and
fractional random-turn games, all behind a reproducible CLI.
"""

from . import analytic_or, bounds, dp, games, process, strategies
from ._kernels import COMPILED
from .boolean_fn import (
    BooleanFunction,
    FourierTable,
    Gate,
    InputError,
    Leaf,
    ResourceError,
    and_fn,
    dictator,
    from_id,
    itmaj,
    maj3,
    or_fn,
    parity_fn,
)
from .process import RunStats, Trajectory, estimate, run, step

__version__ = "0.1.0"

__all__ = [
    "BooleanFunction",
    "FourierTable",
    "Gate",
    "Leaf",
    "InputError",
    "ResourceError",
    "COMPILED",
    "and_fn",
    "dictator",
    "from_id",
    "itmaj",
    "maj3",
    "or_fn",
    "parity_fn",
    "RunStats",
    "Trajectory",
    "estimate",
    "run",
    "step",
    "analytic_or",
    "bounds",
    "dp",
    "games",
    "process",
    "strategies",
]
