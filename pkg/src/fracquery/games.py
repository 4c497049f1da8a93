"""Fractional random-turn games: coin-flip turns, +-1/M moves, +-1 freezing.

Each turn a fair coin picks the mover: player I pushes a live coordinate up
by 1/M, player II pushes one down.  A coordinate that reaches +-1 freezes;
the game ends at a hypercube vertex and player I receives the function
value there.  Under shared max-derivative play the position is a martingale
and the expected payoff equals the harmonic extension at the start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels, process, rng
from .boolean_fn import InputError
from .strategies import MaxDerivative, MiddleBit

GAME_STEP_CAP_FACTOR = 4


def _grid_indices(p, M):
    """Exact grid indices in {0..2M} for a start point, or a rejection."""
    out = []
    for v in p:
        g = (Fraction(v) + 1) * M
        if g.denominator != 1 or not 0 <= g.numerator <= 2 * M:
            raise InputError(
                f"start {p} is not on the 1/{M} grid inside [-1,1]^n")
        out.append(int(g))
    return out


@dataclass
class GameRecord:
    start: list
    M: int
    moves: list          # (player, coordinate, direction)
    terminal: np.ndarray
    payoff: float

    def to_dict(self):
        return {
            "start": [float(v) for v in self.start],
            "M": self.M,
            "moves": [[p, c, d] for p, c, d in self.moves],
            "terminal": [float(v) for v in self.terminal],
            "payoff": self.payoff,
        }


def play(f, p, M, strategy_one, strategy_two, master_seed=0, run_index=0,
         step_cap=None):
    """One full game with explicit strategies and a recorded move log."""
    n = f.n
    grid = _grid_indices(p, M)
    if step_cap is None:
        step_cap = n * GAME_STEP_CAP_FACTOR * M * M
    gen = rng.stream(master_seed, run_index, rng.STREAM_STEP)
    aux = rng.stream(master_seed, run_index, rng.STREAM_STRATEGY)
    ctx_one = strategy_one.start_run(f, aux) if hasattr(
        strategy_one, "start_run") else None
    ctx_two = strategy_two.start_run(f, aux) if hasattr(
        strategy_two, "start_run") else None
    moves = []
    t = 0
    while any(0 < g < 2 * M for g in grid):
        if t >= step_cap:
            raise process.StepCapExceeded(
                f"game exceeded {step_cap} turns; move log length {len(moves)}")
        u = gen.random()
        heads = u < 0.5
        mover, ctx = ((strategy_one, ctx_one) if heads
                      else (strategy_two, ctx_two))
        x = np.array([g / M - 1.0 for g in grid])
        i = mover.decide(f, x, t, gen, ctx)
        if not 0 < grid[i] < 2 * M:
            raise process.StrategyFault(
                f"{mover.id} picked frozen coordinate {i}")
        grid[i] += 1 if heads else -1
        moves.append((1 if heads else 2, i, 1 if heads else -1))
        t += 1
    terminal = np.array([g / M - 1.0 for g in grid])
    payoff = f.evaluate(terminal)
    return GameRecord(start=[float(Fraction(v)) for v in p], M=M,
                      moves=moves, terminal=terminal, payoff=payoff)


def game_value_estimate(f, p, M, runs, master_seed):
    """Monte-Carlo game value under shared max-derivative play.

    The coin and the move direction collapse into one +-1/M martingale
    jump of the chosen coordinate, so batches reuse the jump-process
    kernel with the all-frozen stopping rule.
    """
    grid = _grid_indices(p, M)
    x0 = np.array([g / M - 1.0 for g in grid])
    eps = 1.0 / M
    strat = MaxDerivative()
    spec = strat.kernel_spec(f)
    if spec is not None:
        _, _, finals, statuses = _kernels.simulate_runs(
            x0, eps, runs, master_seed, spec["code"],
            _kernels.DET_ALL_FROZEN, None, None, 0,
            spec["masks"], spec["coefs"], process.DEFAULT_STEP_CAP, 0)
        table = f.dense_table()
        weights = 1 << np.arange(f.n)
        bits = (finals > 0).astype(np.int64)
        payoffs = table[bits.dot(weights)]
    else:
        payoffs = np.empty(runs)
        for r in range(runs):
            rec = play(f, p, M, strat, strat, master_seed, r,
                       step_cap=process.DEFAULT_STEP_CAP)
            payoffs[r] = rec.payoff
    mean = float(np.mean(payoffs))
    stderr = (float(np.std(payoffs, ddof=1) / math.sqrt(runs))
              if runs > 1 else 0.0)
    return {
        "function": f.name,
        "strategy": strat.id,
        "M": M,
        "start": [float(v) for v in x0],
        "runs": runs,
        "seed": master_seed,
        "value_estimate": mean,
        "stderr": stderr,
        "harmonic_value": f.harmonic(x0),
    }


def cost_comparison_maj3(runs, master_seed, epsilon=2.0 ** -5,
                         start=(0.125, 0.25, 0.375)):
    """Expected stopping cost of middle-bit versus max-derivative play.

    Single-player 0-error processes on 3-majority from a start with three
    distinct positive entries; returns both run aggregates.
    """
    from .boolean_fn import maj3

    f = maj3()
    x0 = np.asarray(start, dtype=np.float64)
    mid = process.estimate(f, MiddleBit(), x0, epsilon, runs, master_seed)
    maxd = process.estimate(f, MaxDerivative(), x0, epsilon, runs,
                            master_seed)
    return mid, maxd
