"""Pure-Python reference implementation of the simulation kernel.

Semantics are the contract for the compiled twin: one uniform per step for
the jump sign (random coordinate choice takes one extra uniform drawn first),
clamped endpoints near the boundary, exact +-1 freezing, and per-run Philox
streams keyed by (master seed, run index).
"""

from __future__ import annotations

import numpy as np

from .. import rng
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

_CHUNK_START = 64
_CHUNK_MAX = 8192


class _Uniforms:
    """Buffered draws; batching never changes the underlying stream."""

    def __init__(self, gen):
        self.gen = gen
        self.size = _CHUNK_START
        self.buf = gen.random(self.size)
        self.pos = 0

    def next(self):
        if self.pos == self.buf.shape[0]:
            self.size = min(self.size * 8, _CHUNK_MAX)
            self.buf = self.gen.random(self.size)
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def _status(x, n, det_mode, det_table, code):
    if det_mode == DET_TABLE:
        return int(det_table[code])
    if det_mode == DET_OR:
        neg = 0
        for i in range(n):
            if x[i] == 1.0:
                return 1
            if x[i] == -1.0:
                neg += 1
        return -1 if neg == n else 0
    if det_mode == DET_AND:
        pos = 0
        for i in range(n):
            if x[i] == -1.0:
                return -1
            if x[i] == 1.0:
                pos += 1
        return 1 if pos == n else 0
    if det_mode == DET_ALL_FROZEN:
        for i in range(n):
            if -1.0 < x[i] < 1.0:
                return 0
        return STATUS_FROZEN
    raise ValueError(f"unknown determination mode {det_mode}")


def _derivatives(x, n, masks, coefs, out):
    out[:] = 0.0
    for m, c in zip(masks, coefs):
        bits = []
        mm = int(m)
        while mm:
            b = (mm & -mm).bit_length() - 1
            bits.append(b)
            mm &= mm - 1
        nb = len(bits)
        if nb == 0:
            continue
        # prefix[j] = product of x over bits[:j], suffix likewise from the right
        prefix = 1.0
        suffixes = [1.0] * nb
        for j in range(nb - 2, -1, -1):
            suffixes[j] = suffixes[j + 1] * x[bits[j + 1]]
        for j, b in enumerate(bits):
            out[b] += c * prefix * suffixes[j]
            prefix *= x[b]


def _choose(x, n, strat, uni, policy, lattice_m, epsilon, masks, coefs, deriv_buf):
    if strat == STRAT_S_MAX:
        best = -2.0
        pick = -1
        for i in range(n):
            if -1.0 < x[i] < 1.0 and x[i] > best:
                best = x[i]
                pick = i
        return pick
    if strat == STRAT_RANDOM:
        live = [i for i in range(n) if -1.0 < x[i] < 1.0]
        u = uni.next()
        k = int(u * len(live))
        if k == len(live):
            k -= 1
        return live[k]
    if strat == STRAT_DP_POLICY:
        flat = 0
        scale = 1
        for i in range(n):
            j = int(round((x[i] + 1.0) / epsilon))
            flat += j * scale
            scale *= lattice_m
        return int(policy[flat])  # -1 at determined points, caught above
    if strat == STRAT_MAX_DERIV:
        _derivatives(x, n, masks, coefs, deriv_buf)
        best = 0.0
        pick = -1
        for i in range(n):
            if -1.0 < x[i] < 1.0 and (pick < 0 or deriv_buf[i] > best):
                best = deriv_buf[i]
                pick = i
        return pick
    # STRAT_MIDDLE: median rank of all coordinates, nearest live rank wins
    order = sorted(range(n), key=lambda i: (x[i], i))
    mid = (n - 1) // 2
    ranks = [mid]
    for d in range(1, n):
        if mid + d < n:
            ranks.append(mid + d)
        if mid - d >= 0:
            ranks.append(mid - d)
    for r in ranks:
        i = order[r]
        if -1.0 < x[i] < 1.0:
            return i
    return -1


def simulate_runs(
    x0,
    epsilon,
    runs,
    master_seed,
    strategy_code,
    det_mode,
    det_table=None,
    policy=None,
    lattice_m=0,
    fourier_masks=None,
    fourier_coefs=None,
    step_cap=10_000_000,
    horizon=0,
):
    """Run independent jump processes; returns (tau, qv, finals, status)."""
    x0 = np.asarray(x0, dtype=np.float64)
    n = x0.shape[0]
    taus = np.zeros(runs, dtype=np.int64)
    qvs = np.zeros(runs, dtype=np.float64)
    finals = np.zeros((runs, n), dtype=np.float64)
    statuses = np.zeros(runs, dtype=np.int8)
    deriv_buf = np.zeros(n, dtype=np.float64)
    masks = fourier_masks if fourier_masks is not None else ()
    coefs = fourier_coefs if fourier_coefs is not None else ()

    base_code = 0
    if det_mode == DET_TABLE:
        for i in range(n):
            d = 1
            if x0[i] == 1.0:
                d = 2
            elif x0[i] == -1.0:
                d = 0
            base_code += d * 3 ** i

    for r in range(runs):
        uni = _Uniforms(rng.stream(master_seed, r, rng.STREAM_STEP))
        x = x0.copy()
        code = base_code
        qv = 0.0
        t = 0
        status = _status(x, n, det_mode, det_table, code)
        while status == 0:
            if horizon > 0 and t >= horizon:
                status = STATUS_TRUNCATED
                break
            if t >= step_cap:
                status = STATUS_CAP_FAULT
                break
            i = _choose(x, n, strategy_code, uni, policy, lattice_m,
                        epsilon, masks, coefs, deriv_buf)
            if i < 0:            # no stored direction: treat as a fault
                status = STATUS_CAP_FAULT
                break
            xi = x[i]
            if xi + epsilon > 1.0:
                a, b = 1.0 - 2.0 * epsilon, 1.0
            elif xi - epsilon < -1.0:
                a, b = -1.0, -1.0 + 2.0 * epsilon
            else:
                a, b = xi - epsilon, xi + epsilon
            u = uni.next()
            nxt = a if u < (b - xi) / (2.0 * epsilon) else b
            qv += (nxt - xi) * (nxt - xi)
            x[i] = nxt
            t += 1
            if det_mode == DET_TABLE and (nxt == 1.0 or nxt == -1.0):
                code += (1 if nxt == 1.0 else -1) * 3 ** i
            status = _status(x, n, det_mode, det_table, code)
        taus[r] = t
        qvs[r] = qv
        finals[r] = x
        statuses[r] = status
    return taus, qvs, finals, statuses
