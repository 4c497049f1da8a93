"""Axis-aligned jump processes: single steps, full runs, Monte-Carlo batches.

A process lives in [-1,1]^n and moves one coordinate by +-epsilon per step
(with clamped endpoints near the boundary so the coordinate stays a
martingale).  A run keeps stepping until the revealed +-1 coordinates force
the function value; batches aggregate costs and per-coordinate revealments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels, rng
from .boolean_fn import InputError, determination_table


class StrategyFault(RuntimeError):
    """A strategy picked a coordinate that is frozen at +-1."""


class StepCapExceeded(RuntimeError):
    """Diagnostics guard: the run did not stop within the step budget."""


DEFAULT_STEP_CAP = 10_000_000


def endpoints(x, epsilon):
    """Jump endpoints (a, b) and the probability of landing on a.

    Interior coordinates jump to x -+ epsilon with probability 1/2 each.
    Within epsilon of a wall the endpoints clamp to the wall and its
    mirror point so that the expectation stays exactly x.
    """
    if not -1.0 < x < 1.0:
        raise InputError(f"coordinate {x} is not in (-1, 1)")
    if not 0.0 < epsilon <= 1.0:
        raise InputError("jump size must lie in (0, 1]")
    if x + epsilon > 1.0:
        a, b = 1.0 - 2.0 * epsilon, 1.0
    elif x - epsilon < -1.0:
        a, b = -1.0, -1.0 + 2.0 * epsilon
    else:
        a, b = x - epsilon, x + epsilon
    return a, b, (b - x) / (2.0 * epsilon)


@dataclass
class ProcessState:
    position: np.ndarray
    step_count: int = 0
    accumulated_cost: float = 0.0
    rng: np.random.Generator | None = None

    @classmethod
    def start(cls, x0, master_seed=0, run_index=0):
        x0 = np.asarray(x0, dtype=np.float64)
        if np.any(np.abs(x0) > 1.0):
            raise InputError("start point must lie in [-1,1]^n")
        return cls(position=x0.copy(),
                   rng=rng.stream(master_seed, run_index, rng.STREAM_STEP))


def step(state, i, epsilon):
    """Advance one coordinate by a clamped +-epsilon jump; returns a new state."""
    x = state.position
    if not 0 <= i < x.shape[0]:
        raise InputError(f"direction {i} out of range")
    a, b, p_a = endpoints(float(x[i]), epsilon)
    u = state.rng.random()
    nxt = a if u < p_a else b
    new_pos = x.copy()
    new_pos[i] = nxt
    jump = nxt - x[i]
    return ProcessState(
        position=new_pos,
        step_count=state.step_count + 1,
        accumulated_cost=state.accumulated_cost + jump * jump,
        rng=state.rng,
    )


@dataclass
class Trajectory:
    start: np.ndarray
    final: np.ndarray
    tau: int
    cost: float                      # sum of squared jumps
    displacement_sq: np.ndarray      # (X_i(tau) - X_i(0))^2 per coordinate
    value: int | None                # determined value; None when truncated
    moves: list | None = None        # (t, coordinate, old, new) when recorded

    def write_csv(self, fh):
        fh.write("t,coordinate,old,new\n")
        for t, i, old, new in self.moves or ():
            fh.write(f"{t},{i},{old:.17g},{new:.17g}\n")


def run(f, strategy, x0, epsilon, master_seed=0, run_index=0,
        step_cap=DEFAULT_STEP_CAP, horizon=0, record=False):
    """One full 0-error run (optionally truncated after ``horizon`` steps)."""
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (f.n,):
        raise InputError("start point has wrong dimension")
    state = ProcessState.start(x0, master_seed, run_index)
    ctx = None
    if hasattr(strategy, "start_run"):
        ctx = strategy.start_run(
            f, rng.stream(master_seed, run_index, rng.STREAM_STRATEGY))
    moves = [] if record else None
    value = f.determined(state.position)
    while value is None:
        if horizon > 0 and state.step_count >= horizon:
            break
        if state.step_count >= step_cap:
            raise StepCapExceeded(
                f"run {run_index} exceeded {step_cap} steps at "
                f"position {state.position}")
        i = strategy.decide(f, state.position, state.step_count, state.rng,
                            ctx)
        if i is None:        # lazy no-op: time passes, nothing moves
            state = ProcessState(state.position, state.step_count + 1,
                                 state.accumulated_cost, state.rng)
            continue
        if not -1.0 < state.position[i] < 1.0:
            raise StrategyFault(
                f"strategy {strategy.id} picked frozen coordinate {i} "
                f"in run {run_index}")
        old = float(state.position[i])
        state = step(state, i, epsilon)
        if record:
            moves.append((state.step_count - 1, i, old,
                          float(state.position[i])))
        value = f.determined(state.position)
    disp = (state.position - x0) ** 2
    return Trajectory(start=x0, final=state.position, tau=state.step_count,
                      cost=state.accumulated_cost, displacement_sq=disp,
                      value=value, moves=moves)


@dataclass
class RunStats:
    fn_id: str
    strategy_id: str
    epsilon: float
    runs: int
    seed: int
    mean_cost: float
    cost_stderr: float
    delta: np.ndarray
    delta_stderr: np.ndarray
    mean_qv: float
    qv_stderr: float
    mean_tau: float
    horizon: int = 0
    truncated_runs: int = 0
    warnings: tuple = ()
    finals: np.ndarray | None = field(default=None, repr=False)
    statuses: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self):
        return {
            "function": self.fn_id,
            "strategy": self.strategy_id,
            "epsilon": self.epsilon,
            "runs": self.runs,
            "seed": self.seed,
            "mean_cost": self.mean_cost,
            "stderr": self.cost_stderr,
            "delta": [float(d) for d in self.delta],
            "delta_stderr": [float(d) for d in self.delta_stderr],
            "mean_qv": self.mean_qv,
            "qv_stderr": self.qv_stderr,
            "mean_tau": self.mean_tau,
            "horizon": self.horizon,
            "truncated_runs": self.truncated_runs,
            "warnings": list(self.warnings),
        }


def _stderr(values):
    if values.shape[0] < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.shape[0]))


def kernel_determination(f):
    """(det_mode, table) when the kernel can track determination of f."""
    root = f.root
    if root is not None and not f.is_dense():
        from .boolean_fn import Gate, Leaf

        if isinstance(root, Gate) and all(
                isinstance(c, Leaf) for c in root.children):
            if root.kind == "or":
                return _kernels.DET_OR, None
            if root.kind == "and":
                return _kernels.DET_AND, None
    if f.n <= 10:
        return _kernels.DET_TABLE, determination_table(f)
    return None


def estimate(f, strategy, x0, epsilon, num_runs, master_seed,
             step_cap=DEFAULT_STEP_CAP, horizon=0):
    """Monte-Carlo aggregate over independent runs, reproducible by seed.

    Per-run randomness comes from counter-based streams keyed by
    (master seed, run index), so results are independent of execution
    order.  Uses the compiled kernel whenever the strategy and the
    function both support it.
    """
    if num_runs < 1:
        raise InputError("need at least one run")
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (f.n,):
        raise InputError("start point has wrong dimension")

    warnings = []
    if getattr(strategy, "monotone_required", False):
        try:
            monotone = f.is_monotone()
        except Exception:
            monotone = True
        if not monotone:
            warnings.append(
                f"strategy {strategy.id} assumes a monotone function; "
                f"{f.name} is not monotone")

    spec = strategy.kernel_spec(f) if hasattr(strategy, "kernel_spec") else None
    det = kernel_determination(f) if spec is not None else None
    if spec is not None and det is not None:
        det_mode, det_table = det
        taus, qvs, finals, statuses = _kernels.simulate_runs(
            x0, epsilon, num_runs, master_seed,
            spec["code"], det_mode, det_table,
            spec.get("policy"), spec.get("lattice_m", 0),
            spec.get("masks"), spec.get("coefs"),
            step_cap, horizon,
        )
        if np.any(statuses == _kernels.STATUS_CAP_FAULT):
            bad = int(np.nonzero(statuses == _kernels.STATUS_CAP_FAULT)[0][0])
            raise StepCapExceeded(f"run {bad} exceeded {step_cap} steps")
        disp = (finals - x0[None, :]) ** 2
    else:
        taus = np.zeros(num_runs, dtype=np.int64)
        qvs = np.zeros(num_runs, dtype=np.float64)
        finals = np.zeros((num_runs, f.n), dtype=np.float64)
        statuses = np.zeros(num_runs, dtype=np.int8)
        for r in range(num_runs):
            traj = run(f, strategy, x0, epsilon, master_seed, r,
                       step_cap=step_cap, horizon=horizon)
            taus[r] = traj.tau
            qvs[r] = traj.cost
            finals[r] = traj.final
            statuses[r] = 0 if traj.value is None else traj.value
        disp = (finals - x0[None, :]) ** 2

    costs = disp.sum(axis=1)
    stats = RunStats(
        fn_id=f.name,
        strategy_id=strategy.id,
        epsilon=float(epsilon),
        runs=num_runs,
        seed=int(master_seed),
        mean_cost=float(np.mean(costs)),
        cost_stderr=_stderr(costs),
        delta=disp.mean(axis=0),
        delta_stderr=np.array([_stderr(disp[:, i]) for i in range(f.n)]),
        mean_qv=float(np.mean(qvs)),
        qv_stderr=_stderr(qvs),
        mean_tau=float(np.mean(taus)),
        horizon=horizon,
        truncated_runs=int(np.sum(statuses == 0)),
        warnings=tuple(warnings),
        finals=finals,
        statuses=statuses,
    )
    return stats
