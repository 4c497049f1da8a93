"""Experiment runner: every module behind one subcommand with seeded configs.

All outputs are machine readable (JSON, or CSV where a table is the natural
shape) and fully reproducible from the flags.  Exit codes: 0 success,
1 failed verdict (bounds-check), 2 bad configuration.
"""

from __future__ import annotations

import json
import math
import sys
from fractions import Fraction

import click
import numpy as np

from . import analytic_or, bounds, dp, games, process, strategies
from .boolean_fn import InputError, ResourceError, from_id


def parse_epsilon(text):
    """Accept '2^-k' literals or decimals; dyadic values stay exact."""
    text = text.strip()
    if "^" in text:
        base, expo = text.split("^")
        if base.strip() != "2":
            raise InputError(f"only base-2 literals are supported: {text!r}")
        return 2.0 ** int(expo)
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise InputError("epsilon must lie in (0, 1]")
    return value


def _parse_x0(text, n):
    if text is None:
        return np.zeros(n)
    vals = [float(Fraction(part)) for part in text.split(",")]
    if len(vals) != n:
        raise InputError(f"--x0 needs {n} comma-separated coordinates")
    return np.array(vals)


def _emit(payload, out):
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _fail_usage(exc):
    raise click.UsageError(str(exc))


@click.group()
def main():
    """Fractional query algorithms: simulation, solvers and checkers."""


@main.command("solve-dp")
@click.option("--fn", "fn_id", required=True)
@click.option("--k", type=int, required=True)
@click.option("--out", default=None, help="field dump, .npz or .csv")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", help="summary format on stdout")
def solve_dp_cmd(fn_id, k, out, fmt):
    """Solve the optimal-cost lattice field for a function."""
    try:
        f = from_id(fn_id)
        field, policy = dp.solve(f, k)
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    if out:
        dp.save_field(field, policy, out)
    summary = {
        "function": f.name,
        "k": k,
        "epsilon": field.epsilon,
        "points": int(field.values.shape[0]),
        "u_center": field.center_value(),
        "out": out,
    }
    if fmt == "csv":
        click.echo("function,k,epsilon,points,u_center")
        click.echo(f"{f.name},{k},{field.epsilon:.17g},"
                   f"{summary['points']},{summary['u_center']:.17g}")
    else:
        _emit(summary, None)


def _build_strategy(strategy_id, f, k):
    if strategy_id == "dp_policy":
        if k is None:
            raise InputError("dp_policy without a field file needs --k")
        field, policy = dp.solve(f, k)
        return strategies.DpPolicy(field, policy, source=f"k={k}")
    return strategies.from_id(strategy_id, k=k)


@main.command("simulate")
@click.option("--fn", "fn_id", required=True)
@click.option("--strategy", "strategy_id", required=True)
@click.option("--epsilon", default=None, help="jump size, e.g. 2^-6")
@click.option("--k", type=int, default=None,
              help="dyadic level (epsilon = 2^-k); also solves dp_policy")
@click.option("--runs", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option("--x0", default=None, help="comma-separated start point")
@click.option("--horizon", type=int, default=0,
              help="truncate runs after this many steps")
@click.option("--dump-trajectory", default=None,
              help="CSV move log of run 0")
@click.option("--out", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
def simulate_cmd(fn_id, strategy_id, epsilon, k, runs, seed, x0, horizon,
                 dump_trajectory, out, fmt):
    """Monte-Carlo estimate of cost and revealments for one strategy."""
    try:
        f = from_id(fn_id)
        if epsilon is None and k is None:
            raise InputError("need --epsilon or --k")
        eps = parse_epsilon(epsilon) if epsilon else 2.0 ** (-k)
        strat = _build_strategy(strategy_id, f, k)
        start = _parse_x0(x0, f.n)
        stats = process.estimate(f, strat, start, eps, runs, seed,
                                 horizon=horizon)
        if dump_trajectory:
            traj = process.run(f, strat, start, eps, seed, 0,
                               horizon=horizon, record=True)
            with open(dump_trajectory, "w") as fh:
                traj.write_csv(fh)
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    payload = stats.to_dict()
    if fmt == "csv":
        keys = ["function", "strategy", "epsilon", "runs", "seed",
                "mean_cost", "stderr", "mean_qv", "mean_tau"]
        lines = [",".join(keys),
                 ",".join(_csv_cell(payload[key]) for key in keys)]
        text = "\n".join(lines)
        if out:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        else:
            click.echo(text)
    else:
        _emit(payload, out)


def _csv_cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@main.command("bounds-check")
@click.option("--fn", "fn_id", required=True)
@click.option("--strategy", "strategy_id", required=True)
@click.option("--epsilon", default=None)
@click.option("--k", type=int, default=None)
@click.option("--runs", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--horizon", type=int, default=0)
@click.option("--out", default=None)
def bounds_check_cmd(fn_id, strategy_id, epsilon, k, runs, seed, horizon,
                     out):
    """Check the revealment inequalities on measured statistics."""
    try:
        f = from_id(fn_id)
        if epsilon is None and k is None:
            raise InputError("need --epsilon or --k")
        eps = parse_epsilon(epsilon) if epsilon else 2.0 ** (-k)
        strat = _build_strategy(strategy_id, f, k)
        stats = process.estimate(f, strat, np.zeros(f.n), eps, runs, seed,
                                 horizon=horizon)
        report = bounds.bound_report(f, stats)
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    if out:
        _emit(report.to_dict(), out)
    click.echo(report.render())
    if not report.verdict:
        sys.exit(1)


@main.command("or-analytic")
@click.option("--grid", type=int, default=0, help="dump an m-by-m CSV grid")
@click.option("--eval", "eval_point", default=None,
              help="x1,x2 to evaluate the closed form at")
@click.option("--out", default=None)
def or_analytic_cmd(grid, eval_point, out):
    """Closed-form two-bit OR cost: grid dumps and point evaluation."""
    if grid:
        target = open(out, "w") if out else sys.stdout
        try:
            analytic_or.grid_dump(grid, target)
        finally:
            if out:
                target.close()
        return
    if eval_point is None:
        _fail_usage(InputError("need --grid or --eval"))
    try:
        x1, x2 = (float(v) for v in eval_point.split(","))
        payload = {
            "x1": x1,
            "x2": x2,
            "u": analytic_or.u_or2(x1, x2),
            "diag": analytic_or.g_diag(min(x1, x2)),
        }
    except (ValueError, InputError) as exc:
        _fail_usage(exc)
    _emit(payload, out)


@main.command("tree-cost")
@click.option("--fn", "fn_id", required=True)
@click.option("--mode", type=click.Choice(
    ["optimal", "max-influence", "random-unread"]), default="optimal")
@click.option("--ties", type=click.Choice(["low", "uniform"]), default="low")
@click.option("--out", default=None)
def tree_cost_cmd(fn_id, mode, ties, out):
    """Exact expected query counts of decision trees (epsilon = 1)."""
    try:
        f = from_id(fn_id)
        if mode == "optimal":
            cost = dp.optimal_decision_tree_cost(f)
        elif mode == "max-influence":
            cost = dp.tree_strategy_cost(f, dp.max_influence_chooser(f, ties))
        else:
            cost = dp.tree_strategy_cost(f, dp.random_unread_chooser)
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    _emit({
        "function": f.name,
        "mode": mode,
        "ties": ties if mode == "max-influence" else None,
        "cost": str(cost),
        "cost_float": float(cost),
    }, out)


def _itmaj_baseline_eval(k, gen):
    """Evaluate-two-random-subtrees sampler: returns (value, reads)."""
    if k == 0:
        return (1 if gen.random() < 0.5 else -1), 1
    vals = []
    reads = 0
    u = gen.random()
    first = int(u * 3)
    if first == 3:
        first = 2
    u = gen.random()
    second = int(u * 2)
    rest = [j for j in range(3) if j != first]
    for _ in (first, rest[min(second, 1)]):
        v, r = _itmaj_baseline_eval(k - 1, gen)
        vals.append(v)
        reads += r
    if vals[0] == vals[1]:
        return vals[0], reads
    v, r = _itmaj_baseline_eval(k - 1, gen)
    return v, reads + r


def itmaj_scaling(kmax, runs, seed, epsilon=1.0):
    """Per-depth mean reads of the baseline and the jumping heuristic."""
    from . import rng
    from .boolean_fn import itmaj

    rows = []
    for k in range(1, kmax + 1):
        gen = rng.stream(seed, k, rng.STREAM_STRATEGY)
        reads = np.array([_itmaj_baseline_eval(k, gen)[1]
                          for _ in range(runs)], dtype=np.float64)
        f = itmaj(k)
        stats = process.estimate(f, strategies.TreeHeuristic(),
                                 np.zeros(f.n), epsilon, runs, seed + k)
        rows.append({
            "k": k,
            "baseline_mean": float(reads.mean()),
            "baseline_stderr": float(reads.std(ddof=1) / math.sqrt(runs)),
            "heuristic_mean": stats.mean_cost,
            "heuristic_stderr": stats.cost_stderr,
            "heuristic_root": stats.mean_cost ** (1.0 / k),
            "two_subtree_reference": 2.5 ** k,
        })
    return {"runs": runs, "seed": seed, "epsilon": epsilon, "levels": rows}


@main.command("itmaj-scaling")
@click.option("--kmax", type=int, default=3)
@click.option("--runs", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--epsilon", default="1", help="jump size for the heuristic")
@click.option("--out", default=None)
def itmaj_scaling_cmd(kmax, runs, seed, epsilon, out):
    """Iterated-majority cost scaling: baseline vs jumping heuristic."""
    try:
        eps = parse_epsilon(epsilon)
        payload = itmaj_scaling(kmax, runs, seed, eps)
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    _emit(payload, out)


@main.command("random-turn")
@click.option("--fn", "fn_id", required=True)
@click.option("--m", "--M", "m_value", type=int, required=True)
@click.option("--p", default=None, help="comma-separated start, default 0")
@click.option("--runs", type=int, default=4000)
@click.option("--seed", type=int, default=0)
@click.option("--records", default=None,
              help="also write this many single-game JSON lines")
@click.option("--records-count", type=int, default=8)
@click.option("--out", default=None)
def random_turn_cmd(fn_id, m_value, p, runs, seed, records, records_count,
                    out):
    """Game value estimate under shared max-derivative play."""
    try:
        f = from_id(fn_id)
        start = ([Fraction(part) for part in p.split(",")]
                 if p else [Fraction(0)] * f.n)
        payload = games.game_value_estimate(f, start, m_value, runs, seed)
        if records:
            strat = strategies.MaxDerivative()
            with open(records, "w") as fh:
                for r in range(records_count):
                    rec = games.play(f, start, m_value, strat, strat,
                                     seed, r)
                    fh.write(json.dumps(rec.to_dict()) + "\n")
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    _emit(payload, out)


@main.command("convergence")
@click.option("--fn", "fn_id", required=True)
@click.option("--kmin", type=int, default=3)
@click.option("--kmax", type=int, default=6)
@click.option("--out", default=None)
def convergence_cmd(fn_id, kmin, kmax, out):
    """Centre values of the cost field across dyadic levels."""
    try:
        f = from_id(fn_id)
        payload = dp.convergence_study(f, list(range(kmin, kmax + 1)))
    except (InputError, ResourceError) as exc:
        _fail_usage(exc)
    _emit(payload, out)


if __name__ == "__main__":
    main()
