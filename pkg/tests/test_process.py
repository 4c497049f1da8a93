import numpy as np
import pytest

import fracquery._kernels as K
from fracquery import process, rng, strategies
from fracquery._kernels import _fallback
from fracquery.boolean_fn import (
    InputError,
    determination_table,
    dictator,
    maj3,
    or_fn,
    parity_fn,
)
from fracquery.process import ProcessState, endpoints, estimate, run, step


def test_endpoints_decision_tree_case():
    assert endpoints(0.0, 1.0) == (-1.0, 1.0, 0.5)


def test_endpoints_clamped_near_wall():
    eps = 0.25
    a, b, p_a = endpoints(1.0 - eps / 2.0, eps)
    assert (a, b) == (1.0 - 2 * eps, 1.0)
    assert p_a == pytest.approx(0.25, abs=1e-15)
    a, b, p_a = endpoints(-1.0 + eps / 2.0, eps)
    assert (a, b) == (-1.0, -1.0 + 2 * eps)
    assert p_a == pytest.approx(0.75, abs=1e-15)


def test_endpoints_martingale_identity():
    # a * p(a) + b * p(b) = x for every state, pure algebra
    for eps in (1.0, 0.5, 2.0 ** -3, 2.0 ** -6, 0.3):
        for x in np.linspace(-0.999, 0.999, 41):
            a, b, p_a = endpoints(float(x), eps)
            assert a * p_a + b * (1 - p_a) == pytest.approx(x, abs=1e-12)
            assert b - a == pytest.approx(2 * eps, abs=1e-15)


def test_endpoints_rejects_frozen_and_bad_eps():
    with pytest.raises(InputError):
        endpoints(1.0, 0.5)
    with pytest.raises(InputError):
        endpoints(0.0, 0.0)
    with pytest.raises(InputError):
        endpoints(0.0, 1.5)


def test_step_bookkeeping_and_martingale():
    state = ProcessState.start([0.5, 0.0], master_seed=1)
    nxt = step(state, 0, 0.25)
    assert nxt.step_count == 1
    assert abs(nxt.position[0] - 0.5) == pytest.approx(0.25, abs=1e-15)
    assert nxt.accumulated_cost == pytest.approx(0.25 ** 2, abs=1e-18)
    assert nxt.position[1] == 0.0

    total = 0.0
    n_steps = 100_000
    state = ProcessState.start([0.25, 0.0], master_seed=3)
    for _ in range(n_steps):
        total += step(state, 0, 2.0 ** -3).position[0]
    mean = total / n_steps
    stderr = (2.0 ** -3) / np.sqrt(n_steps)
    assert abs(mean - 0.25) < 4 * stderr


def test_step_rejects_frozen_coordinate():
    state = ProcessState.start([1.0, 0.0], master_seed=0)
    with pytest.raises(InputError):
        step(state, 0, 0.5)


def test_run_determined_at_start():
    traj = run(or_fn(2), strategies.SMax(), [1.0, 0.0], 0.5, 1)
    assert traj.tau == 0 and traj.cost == 0.0 and traj.value == 1


def test_run_parity_reads_everything():
    for seed in range(5):
        traj = run(parity_fn(2), strategies.RandomUnread(), [0.0, 0.0], 1.0,
                   seed)
        assert traj.tau == 2 and traj.cost == 2.0
        assert traj.value in (-1, 1)


def test_run_dictator_unit_cost_any_epsilon():
    for k in (0, 2, 4):
        traj = run(dictator(1, 0), strategies.SMax(), [0.0], 2.0 ** -k, 11)
        assert traj.displacement_sq[0] == 1.0
        assert traj.value in (-1, 1)


def test_dictator_quadratic_variation_estimates_one():
    stats = estimate(dictator(1, 0), strategies.SMax(), [0.0], 2.0 ** -3,
                     4000, 19)
    assert abs(stats.mean_qv - 1.0) < 4 * stats.qv_stderr


def test_run_strategy_fault():
    class Bad:
        id = "bad"

        def decide(self, f, x, t, gen, ctx=None):
            return 1  # dead coordinate below

    with pytest.raises(process.StrategyFault):
        run(parity_fn(2), Bad(), [0.0, 1.0], 0.5, 0)


def test_run_step_cap():
    with pytest.raises(process.StepCapExceeded):
        run(parity_fn(2), strategies.RandomUnread(), [0.0, 0.0], 2.0 ** -6, 0,
            step_cap=3)


def test_lazy_noop_costs_nothing():
    class LazyMax(strategies.SMax):
        id = "lazy_s_max"

        def decide(self, f, x, t, gen, ctx=None):
            if t % 2 == 0:
                return None
            return super().decide(f, x, t, gen, ctx)

    eager = run(maj3(), strategies.SMax(), [0.0] * 3, 0.5, 21)
    lazy = run(maj3(), LazyMax(), [0.0] * 3, 0.5, 21)
    assert lazy.cost == eager.cost
    assert np.array_equal(lazy.final, eager.final)
    assert lazy.tau == 2 * eager.tau


def test_estimate_exact_dictator_delta():
    f = dictator(2, 0)
    stats = estimate(f, strategies.SMax(), [0.0, 0.0], 1.0, 200, 9)
    assert stats.mean_cost == 1.0 and stats.cost_stderr == 0.0
    assert list(stats.delta) == [1.0, 0.0]


def test_estimate_or2_random_unread_mean():
    stats = estimate(or_fn(2), strategies.RandomUnread(), [0.0, 0.0], 1.0,
                     60_000, 13)
    assert abs(stats.mean_cost - 1.5) < 3 * stats.cost_stderr + 1e-9


def test_estimate_cost_is_sum_of_deltas():
    stats = estimate(maj3(), strategies.RandomUnread(), [0.0] * 3, 2.0 ** -2,
                     400, 3)
    assert stats.mean_cost == pytest.approx(float(np.sum(stats.delta)),
                                            abs=1e-12)


def test_estimate_qv_agrees_with_displacement_cost():
    stats = estimate(maj3(), strategies.SMax(), [0.0] * 3, 2.0 ** -3,
                     4000, 17)
    combined = np.hypot(stats.cost_stderr, stats.qv_stderr)
    assert abs(stats.mean_cost - stats.mean_qv) < 4 * combined


def test_estimate_deterministic_given_seed():
    a = estimate(or_fn(3), strategies.SMax(), [0.0] * 3, 2.0 ** -3, 500, 42)
    b = estimate(or_fn(3), strategies.SMax(), [0.0] * 3, 2.0 ** -3, 500, 42)
    assert a.mean_cost == b.mean_cost
    assert np.array_equal(a.delta, b.delta)
    assert np.array_equal(a.finals, b.finals)
    assert a.to_dict() == b.to_dict()


def test_zero_error_final_states():
    f = maj3()
    stats = estimate(f, strategies.RandomUnread(), [0.0] * 3, 2.0 ** -2,
                     200, 7)
    assert stats.truncated_runs == 0
    gen = np.random.default_rng(0)
    for r in range(0, 200, 19):
        x = stats.finals[r]
        value = f.determined(x)
        assert value == stats.statuses[r]
        assert f.harmonic(x) == value
        # sampled completions with the final coordinates as means agree
        for _ in range(8):
            y = np.where(gen.random(3) < (1 + x) / 2, 1.0, -1.0)
            assert f.evaluate(y) == value


@pytest.mark.parametrize("case", ["s_max_or", "random_table", "max_deriv",
                                  "middle", "horizon", "clamped"])
def test_kernel_matches_fallback_bit_for_bit(case):
    if case == "s_max_or":
        args = (np.zeros(5), 2.0 ** -3, 120, 42, K.STRAT_S_MAX, K.DET_OR,
                None, None, 0, None, None, 10 ** 7, 0)
    elif case == "clamped":
        # off-grid start, jumps overshoot the walls and clamp
        args = (np.array([0.3, -0.1]), 0.25, 150, 8, K.STRAT_S_MAX,
                K.DET_OR, None, None, 0, None, None, 10 ** 7, 0)
    elif case == "random_table":
        tab = determination_table(maj3())
        args = (np.zeros(3), 2.0 ** -2, 120, 7, K.STRAT_RANDOM, K.DET_TABLE,
                tab, None, 0, None, None, 10 ** 7, 0)
    elif case == "max_deriv":
        spec = strategies.MaxDerivative().kernel_spec(maj3())
        tab = determination_table(maj3())
        args = (np.zeros(3), 2.0 ** -2, 120, 9, K.STRAT_MAX_DERIV,
                K.DET_TABLE, tab, None, 0, spec["masks"], spec["coefs"],
                10 ** 7, 0)
    elif case == "middle":
        tab = determination_table(maj3())
        args = (np.array([0.125, 0.25, 0.375]), 2.0 ** -3, 120, 10,
                K.STRAT_MIDDLE, K.DET_TABLE, tab, None, 0, None, None,
                10 ** 7, 0)
    else:
        tab = determination_table(maj3())
        args = (np.zeros(3), 2.0 ** -3, 120, 11, K.STRAT_MAX_DERIV,
                K.DET_TABLE, tab, None, 0,
                strategies.MaxDerivative().kernel_spec(maj3())["masks"],
                strategies.MaxDerivative().kernel_spec(maj3())["coefs"],
                10 ** 7, 4)
    fast = K.simulate_runs(*args)
    slow = _fallback.simulate_runs(*args)
    for got, want in zip(fast, slow):
        assert np.array_equal(np.asarray(got), np.asarray(want))


def test_kernel_dp_policy_matches_fallback():
    from fracquery import dp

    f = or_fn(2)
    field, policy = dp.solve(f, 4)
    tab = determination_table(f.densified())
    args = (np.zeros(2), 2.0 ** -4, 100, 23, K.STRAT_DP_POLICY, K.DET_TABLE,
            tab, policy.directions.astype(np.int32), field.m, None, None,
            10 ** 7, 0)
    fast = K.simulate_runs(*args)
    slow = _fallback.simulate_runs(*args)
    for got, want in zip(fast, slow):
        assert np.array_equal(np.asarray(got), np.asarray(want))


def test_estimate_horizon_truncates():
    stats = estimate(parity_fn(3), strategies.RandomUnread(), [0.0] * 3,
                     2.0 ** -3, 50, 3, horizon=2)
    assert stats.truncated_runs == 50
    assert stats.mean_tau == 2.0


def test_run_stats_json_fields():
    stats = estimate(or_fn(2), strategies.SMax(), [0.0, 0.0], 0.5, 20, 1)
    payload = stats.to_dict()
    for key in ("function", "strategy", "epsilon", "runs", "seed",
                "mean_cost", "stderr", "delta", "mean_qv"):
        assert key in payload
    assert payload["function"] == "or:2"
    assert len(payload["delta"]) == 2


def test_trajectory_record_and_csv(tmp_path):
    traj = run(or_fn(2), strategies.SMax(), [0.0, 0.0], 0.5, 5, record=True)
    assert len(traj.moves) == traj.tau
    out = tmp_path / "traj.csv"
    with open(out, "w") as fh:
        traj.write_csv(fh)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,coordinate,old,new"
    assert len(lines) == traj.tau + 1


def test_non_monotone_use_is_flagged_not_rejected():
    stats = estimate(parity_fn(2), strategies.MaxDerivative(), [0.0, 0.0],
                     0.5, 50, 2)
    assert stats.truncated_runs == 0
    assert any("monotone" in w for w in stats.warnings)
    clean = estimate(maj3(), strategies.MaxDerivative(), [0.0] * 3,
                     0.5, 50, 2)
    assert clean.warnings == ()


def test_philox_streams_are_independent_of_run_order():
    a = rng.stream(5, 3).random(4)
    _ = rng.stream(5, 999).random(100)
    b = rng.stream(5, 3).random(4)
    assert np.array_equal(a, b)
