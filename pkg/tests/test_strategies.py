import numpy as np
import pytest

from fracquery import dp, process, rng, strategies
from fracquery.boolean_fn import (
    BooleanFunction,
    Gate,
    InputError,
    Leaf,
    dictator,
    itmaj,
    maj3,
    or_fn,
    parity_fn,
)


def test_s_max_examples():
    s = strategies.SMax()
    assert s.decide(None, np.array([0.25, -0.5, 0.25]), 0, None) == 0
    assert s.decide(None, np.array([-0.9, 0.7]), 0, None) == 1
    assert s.decide(None, np.array([1.0, 0.2, 0.5]), 0, None) == 2
    with pytest.raises(InputError):
        s.decide(None, np.array([1.0, -1.0]), 0, None)


def test_max_derivative_examples():
    s = strategies.MaxDerivative()
    f = maj3()
    assert s.decide(f, np.array([0.1, 0.2, 0.3]), 0, None) == 2
    assert s.decide(f, np.array([0.0, 0.0, 0.0]), 0, None) == 0
    assert s.decide(or_fn(2), np.array([0.5, -0.5]), 0, None) == 0


def test_max_derivative_on_or_equals_largest_coordinate(rng):
    s = strategies.SMax()
    d = strategies.MaxDerivative()
    f = or_fn(4)
    for _ in range(1000):
        x = rng.uniform(-0.99, 0.99, size=4)
        if len(set(np.round(x, 12))) < 4:
            continue
        assert d.decide(f, x, 0, None) == s.decide(None, x, 0, None)


def test_or_block_choice_examples():
    assert strategies.or_block_choice([1.0, 1.2], [0.0, 0.5]) == 1
    assert strategies.or_block_choice([1.0, 1.0], [0.2, 0.2]) == 0
    assert strategies.or_block_choice([0.5, 1.0], [-1.0, 0.0]) == 1
    with pytest.raises(InputError):
        strategies.or_block_choice([0.5, 0.5], [-1.0, -1.0])


def test_tree_heuristic_maj_reduction():
    th = strategies.TreeHeuristic()
    f = maj3()
    # one child true: node is an OR of the remaining leaves
    assert th.decide(f, np.array([1.0, 0.3, -0.2]), 0, None, None) == 1
    # one child false: node is an AND, mirrored criterion
    assert th.decide(f, np.array([-1.0, 0.3, -0.2]), 0, None, None) == 2
    # two children settled either way: only the third may move
    assert th.decide(f, np.array([1.0, -1.0, 0.1]), 0, None, None) == 2


def test_tree_heuristic_frozen_choice_reproducible():
    th = strategies.TreeHeuristic()
    f = itmaj(2)
    ctx_a = th.start_run(f, rng.stream(3, 0, rng.STREAM_STRATEGY))
    ctx_b = th.start_run(f, rng.stream(3, 0, rng.STREAM_STRATEGY))
    x = np.zeros(9)
    pick_a = th.decide(f, x, 0, None, ctx_a)
    pick_b = th.decide(f, x, 0, None, ctx_b)
    assert pick_a == pick_b


def test_markov_strategies_replay_equal(rng):
    f = maj3()
    for strat in (strategies.SMax(), strategies.MaxDerivative(),
                  strategies.MiddleBit()):
        for _ in range(50):
            x = rng.uniform(-0.99, 0.99, size=3)
            assert strat.decide(f, x, 0, None) == strat.decide(f, x, 7, None)


@pytest.mark.parametrize("make", [
    lambda: (strategies.SMax(), or_fn(4)),
    lambda: (strategies.MaxDerivative(), maj3()),
    lambda: (strategies.RandomUnread(), parity_fn(4)),
    lambda: (strategies.MiddleBit(), maj3()),
    lambda: (strategies.TreeHeuristic(), itmaj(2)),
])
def test_returned_coordinate_is_live_fuzz(make):
    strat, f = make()
    gen = np.random.default_rng(11)
    ctx = strat.start_run(f, gen)
    for _ in range(10_000):
        x = gen.uniform(-1, 1, size=f.n)
        freeze = gen.random(f.n) < 0.3
        x[freeze] = np.where(gen.random(freeze.sum()) < 0.5, -1.0, 1.0)
        if f.determined(x) is not None or not np.any(np.abs(x) < 1.0):
            continue
        i = strat.decide(f, x, 0, gen, ctx)
        assert -1.0 < x[i] < 1.0


def test_middle_bit_examples():
    s = strategies.MiddleBit()
    assert s.decide(None, np.array([0.1, 0.2, 0.3]), 0, None) == 1
    assert s.decide(None, np.array([0.5, 0.2, 0.3]), 0, None) == 2
    # a frozen coordinate ranks at the extreme, so the median stays live
    # and lands on the optimal bit of the reduced problem
    assert s.decide(None, np.array([1.0, 0.2, 0.3]), 0, None) == 2
    assert s.decide(None, np.array([-1.0, 0.2, 0.3]), 0, None) == 1


def test_dp_policy_strategy():
    f = dictator(2, 0)
    field, policy = dp.solve(f, 3)
    strat = strategies.DpPolicy(field, policy, source="k=3")
    assert strat.decide(f, np.array([0.0, 0.25]), 0, None) == 0
    assert strat.decide(f, np.array([-0.5, 0.75]), 0, None) == 0
    with pytest.raises(InputError):
        strat.decide(f, np.array([0.3, 0.0]), 0, None)  # off lattice


def test_dp_policy_or2_diagonal_direction():
    f = or_fn(2)
    field, policy = dp.solve(f, 4)
    strat = strategies.DpPolicy(field, policy, source="k=4")
    for x in (0.0, 0.25, -0.5):
        assert strat.decide(f, np.array([x, x]), 0, None) == 0


def test_or_heuristic_runs_match_block_structure():
    root = Gate("or", (Gate("and", (Leaf(0), Leaf(1))),
                       Gate("and", (Leaf(2), Leaf(3)))))
    f = BooleanFunction(4, root=root, name="or(and2,and2)")
    for strat in (strategies.OrHeuristic("proxy"),
                  strategies.OrHeuristic("exact", k=3)):
        stats = process.estimate(f, strat, np.zeros(4), 2.0 ** -3, 200, 5)
        assert stats.truncated_runs == 0
        assert stats.mean_cost > 1.0


def test_or_heuristic_modes_agree_on_flat_or():
    # with single-leaf blocks the proxy cost 1 - x^2 equals the solved
    # block cost exactly, so both modes must pick identical bits
    f = or_fn(4)
    proxy = strategies.OrHeuristic("proxy")
    exact = strategies.OrHeuristic("exact", k=3)
    a = process.estimate(f, proxy, np.zeros(4), 2.0 ** -3, 400, 21)
    b = process.estimate(f, exact, np.zeros(4), 2.0 ** -3, 400, 21)
    assert a.mean_cost == b.mean_cost
    assert np.array_equal(a.finals, b.finals)


def test_or_heuristic_needs_or_root():
    strat = strategies.OrHeuristic("proxy")
    with pytest.raises(InputError):
        strat.start_run(parity_fn(2), rng.stream(0, 0))


def test_strategy_ids_resolve():
    for sid in ("s_max", "max_derivative", "random_unread", "middle_bit",
                "itmaj", "or_heuristic:proxy"):
        assert strategies.from_id(sid).id.startswith(sid.split(":")[0])
    with pytest.raises(InputError):
        strategies.from_id("gradient_descent")


def test_dp_policy_from_saved_field(tmp_path):
    f = maj3()
    field, policy = dp.solve(f, 3)
    path = tmp_path / "maj3.npz"
    dp.save_field(field, policy, str(path))
    strat = strategies.from_id(f"dp_policy:{path}")
    stats = process.estimate(f, strat, np.zeros(3), 2.0 ** -3, 300, 3)
    assert abs(stats.mean_cost - field.center_value()) < \
        4 * stats.cost_stderr + 1e-9
