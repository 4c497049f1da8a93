"""Compare the compiled simulation kernel against the pure-Python fallback.

Both paths consume randomness identically, so besides timing the script
verifies that every output array matches bit for bit.  Run from the repo
root:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

import fracquery._kernels as K
from fracquery import dp, strategies
from fracquery._kernels import _fallback
from fracquery.boolean_fn import determination_table, maj3, or_fn


def workloads():
    f10 = or_fn(10)
    yield ("s_max on or:10, eps 2^-5, 500 runs", (
        np.zeros(10), 2.0 ** -5, 500, 7, K.STRAT_S_MAX, K.DET_OR,
        None, None, 0, None, None, 10 ** 7, 0))

    m3 = maj3()
    spec = strategies.MaxDerivative().kernel_spec(m3)
    tab = determination_table(m3)
    yield ("max_derivative on maj3, eps 2^-5, 1000 runs", (
        np.zeros(3), 2.0 ** -5, 1000, 11, K.STRAT_MAX_DERIV, K.DET_TABLE,
        tab, None, 0, spec["masks"], spec["coefs"], 10 ** 7, 0))

    field, policy = dp.solve(or_fn(2), 5)
    tab2 = determination_table(or_fn(2).densified())
    yield ("dp_policy on or:2, eps 2^-5, 1000 runs", (
        np.zeros(2), 2.0 ** -5, 1000, 13, K.STRAT_DP_POLICY, K.DET_TABLE,
        tab2, policy.directions.astype(np.int32), field.m, None, None,
        10 ** 7, 0))

    yield ("random_unread on or:10, eps 1, 200000 runs", (
        np.zeros(10), 1.0, 200_000, 17, K.STRAT_RANDOM, K.DET_OR,
        None, None, 0, None, None, 10 ** 7, 0))


def main():
    if not K.COMPILED:
        print("compiled kernel not importable; nothing to compare")
        return
    print(f"{'workload':<48} {'compiled':>10} {'pure':>10} {'speedup':>9}")
    for name, args in workloads():
        t0 = time.perf_counter()
        fast = K.simulate_runs(*args)
        t_fast = time.perf_counter() - t0
        t0 = time.perf_counter()
        slow = _fallback.simulate_runs(*args)
        t_slow = time.perf_counter() - t0
        identical = all(np.array_equal(np.asarray(a), np.asarray(b))
                        for a, b in zip(fast, slow))
        if not identical:
            raise SystemExit(f"kernel outputs diverge on: {name}")
        steps = int(np.asarray(fast[0]).sum())
        print(f"{name:<48} {t_fast:>9.3f}s {t_slow:>9.3f}s "
              f"{t_slow / t_fast:>8.1f}x   ({steps} steps, bit-identical)")


if __name__ == "__main__":
    main()
