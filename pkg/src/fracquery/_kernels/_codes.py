"""Shared opcode constants for the simulation kernels."""

STRAT_S_MAX = 0
STRAT_RANDOM = 1
STRAT_DP_POLICY = 2
STRAT_MAX_DERIV = 3
STRAT_MIDDLE = 4

DET_TABLE = 0
DET_OR = 1
DET_AND = 2
DET_ALL_FROZEN = 3

# run status codes: +1/-1 are determined function values
STATUS_TRUNCATED = 0
STATUS_FROZEN = 2
STATUS_CAP_FAULT = -2
