# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the pure-Python simulation kernel.

Must stay bit-identical with ``_fallback.simulate_runs``: same uniform
consumption order, same clamped-endpoint arithmetic, no reordering of
floating-point expressions (builds with fp-contract disabled).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport llround

from .. import rng as _rng

DEF CHUNK_START = 64
DEF CHUNK_MAX = 8192
DEF MAX_DIM = 64

cdef int T_S_MAX = 0
cdef int T_RANDOM = 1
cdef int T_DP_POLICY = 2
cdef int T_MAX_DERIV = 3
cdef int T_MIDDLE = 4

cdef int D_TABLE = 0
cdef int D_OR = 1
cdef int D_AND = 2
cdef int D_ALL_FROZEN = 3

cdef int S_TRUNCATED = 0
cdef int S_FROZEN = 2
cdef int S_CAP_FAULT = -2


cdef inline int _status(double* x, Py_ssize_t n, int det_mode,
                        signed char* det_table, long long code) noexcept:
    cdef Py_ssize_t i
    cdef int neg = 0, pos = 0
    if det_mode == D_TABLE:
        return det_table[code]
    if det_mode == D_OR:
        for i in range(n):
            if x[i] == 1.0:
                return 1
            if x[i] == -1.0:
                neg += 1
        return -1 if neg == n else 0
    if det_mode == D_AND:
        for i in range(n):
            if x[i] == -1.0:
                return -1
            if x[i] == 1.0:
                pos += 1
        return 1 if pos == n else 0
    for i in range(n):
        if -1.0 < x[i] < 1.0:
            return 0
    return S_FROZEN


cdef inline void _derivatives(double* x, Py_ssize_t n,
                              Py_ssize_t nmask, long long* offs,
                              int* bits, double* coefs,
                              double* out) noexcept:
    cdef Py_ssize_t m, j, start, stop, nb
    cdef double c, prefix
    cdef double suff[MAX_DIM]
    for j in range(n):
        out[j] = 0.0
    for m in range(nmask):
        start = offs[m]
        stop = offs[m + 1]
        nb = stop - start
        if nb == 0:
            continue
        c = coefs[m]
        suff[nb - 1] = 1.0
        for j in range(nb - 2, -1, -1):
            suff[j] = suff[j + 1] * x[bits[start + j + 1]]
        prefix = 1.0
        for j in range(nb):
            out[bits[start + j]] += c * prefix * suff[j]
            prefix *= x[bits[start + j]]


def simulate_runs(
    x0,
    double epsilon,
    Py_ssize_t runs,
    master_seed,
    int strategy_code,
    int det_mode,
    det_table=None,
    policy=None,
    Py_ssize_t lattice_m=0,
    fourier_masks=None,
    fourier_coefs=None,
    long long step_cap=10_000_000,
    long long horizon=0,
):
    """Run independent jump processes; returns (tau, qv, finals, status)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x0a = \
        np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t n = x0a.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"kernel supports at most {MAX_DIM} coordinates")

    cdef cnp.ndarray[cnp.int64_t, ndim=1] taus = np.zeros(runs, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qvs = np.zeros(runs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] finals = np.zeros((runs, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] statuses = np.zeros(runs, dtype=np.int8)

    cdef cnp.ndarray[cnp.int8_t, ndim=1] dta
    cdef signed char* dtp = NULL
    if det_table is not None:
        dta = np.ascontiguousarray(det_table, dtype=np.int8)
        dtp = <signed char*> dta.data

    cdef cnp.ndarray[cnp.int32_t, ndim=1] pola
    cdef int* polp = NULL
    if policy is not None:
        pola = np.ascontiguousarray(np.asarray(policy).reshape(-1), dtype=np.int32)
        polp = <int*> pola.data

    # CSR layout of the nonzero multilinear coefficients for derivative picks
    cdef Py_ssize_t nmask = 0
    cdef cnp.ndarray[cnp.int64_t, ndim=1] offs_a = np.zeros(1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bits_a = np.zeros(0, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] coefs_a = np.zeros(0, dtype=np.float64)
    if fourier_masks is not None:
        masks_list = [int(m) for m in fourier_masks]
        nmask = len(masks_list)
        offs = [0]
        bits = []
        for m in masks_list:
            while m:
                bits.append((m & -m).bit_length() - 1)
                m &= m - 1
            offs.append(len(bits))
        offs_a = np.asarray(offs, dtype=np.int64)
        bits_a = np.asarray(bits, dtype=np.int32)
        coefs_a = np.ascontiguousarray(fourier_coefs, dtype=np.float64)
    cdef long long* offs_p = <long long*> offs_a.data
    cdef int* bits_p = <int*> bits_a.data
    cdef double* coefs_p = <double*> coefs_a.data

    cdef long long pow3[MAX_DIM]
    cdef Py_ssize_t i
    cdef long long p3 = 1
    for i in range(n):
        pow3[i] = p3
        p3 *= 3

    cdef long long base_code = 0
    if det_mode == D_TABLE:
        for i in range(n):
            if x0a[i] == 1.0:
                base_code += 2 * pow3[i]
            elif x0a[i] == -1.0:
                pass
            else:
                base_code += pow3[i]

    cdef double x[MAX_DIM]
    cdef double deriv[MAX_DIM]
    cdef int live[MAX_DIM]
    cdef double[::1] buf
    cdef Py_ssize_t pos, bufsize, r, pick, nl, j, kth
    cdef long long t, code, flat, scale, latj
    cdef int status
    cdef double qv, xi, a, b, u, nxt, best

    for r in range(runs):
        gen = _rng.stream(master_seed, r, 0)
        bufsize = CHUNK_START
        buf = gen.random(bufsize)
        pos = 0
        for i in range(n):
            x[i] = x0a[i]
        code = base_code
        qv = 0.0
        t = 0
        status = _status(x, n, det_mode, dtp, code)
        while status == 0:
            if horizon > 0 and t >= horizon:
                status = S_TRUNCATED
                break
            if t >= step_cap:
                status = S_CAP_FAULT
                break
            # choose a live direction
            if strategy_code == T_S_MAX:
                best = -2.0
                pick = -1
                for i in range(n):
                    if -1.0 < x[i] < 1.0 and x[i] > best:
                        best = x[i]
                        pick = i
            elif strategy_code == T_RANDOM:
                nl = 0
                for i in range(n):
                    if -1.0 < x[i] < 1.0:
                        live[nl] = i
                        nl += 1
                if pos == bufsize:
                    bufsize = min(bufsize * 8, CHUNK_MAX)
                    buf = gen.random(bufsize)
                    pos = 0
                u = buf[pos]
                pos += 1
                kth = <Py_ssize_t> (u * nl)
                if kth == nl:
                    kth -= 1
                pick = live[kth]
            elif strategy_code == T_DP_POLICY:
                flat = 0
                scale = 1
                for i in range(n):
                    latj = llround((x[i] + 1.0) / epsilon)
                    flat += latj * scale
                    scale *= lattice_m
                pick = polp[flat]
                if pick < 0:      # no stored direction: treat as a fault
                    status = S_CAP_FAULT
                    break
            elif strategy_code == T_MAX_DERIV:
                _derivatives(x, n, nmask, offs_p, bits_p, coefs_p, deriv)
                best = 0.0
                pick = -1
                for i in range(n):
                    if -1.0 < x[i] < 1.0 and (pick < 0 or deriv[i] > best):
                        best = deriv[i]
                        pick = i
            else:
                # median rank over all coordinates, nearest live rank wins
                for i in range(n):
                    live[i] = i
                for j in range(1, n):
                    kth = live[j]
                    i = j - 1
                    while i >= 0 and x[live[i]] > x[kth]:
                        live[i + 1] = live[i]
                        i -= 1
                    live[i + 1] = kth
                nl = (n - 1) // 2
                pick = -1
                if -1.0 < x[live[nl]] < 1.0:
                    pick = live[nl]
                else:
                    for j in range(1, n):
                        if nl + j < n and -1.0 < x[live[nl + j]] < 1.0:
                            pick = live[nl + j]
                            break
                        if nl - j >= 0 and -1.0 < x[live[nl - j]] < 1.0:
                            pick = live[nl - j]
                            break

            xi = x[pick]
            if xi + epsilon > 1.0:
                a = 1.0 - 2.0 * epsilon
                b = 1.0
            elif xi - epsilon < -1.0:
                a = -1.0
                b = -1.0 + 2.0 * epsilon
            else:
                a = xi - epsilon
                b = xi + epsilon
            if pos == bufsize:
                bufsize = min(bufsize * 8, CHUNK_MAX)
                buf = gen.random(bufsize)
                pos = 0
            u = buf[pos]
            pos += 1
            nxt = a if u < (b - xi) / (2.0 * epsilon) else b
            qv += (nxt - xi) * (nxt - xi)
            x[pick] = nxt
            t += 1
            if det_mode == D_TABLE and (nxt == 1.0 or nxt == -1.0):
                code += pow3[pick] if nxt == 1.0 else -pow3[pick]
            status = _status(x, n, det_mode, dtp, code)
        taus[r] = t
        qvs[r] = qv
        for i in range(n):
            finals[r, i] = x[i]
        statuses[r] = status
    return taus, qvs, finals, statuses
