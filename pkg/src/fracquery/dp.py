"""Optimal query cost on dyadic lattices, and exact decision-tree costs.

``solve`` computes the best achievable cost field u on the lattice
[-1,1]^n with spacing 2^-k, together with the argmin direction at every
live lattice point.  Facets are solved first by recursion on dimension
(restricting the function), then the interior is solved by policy
iteration: repeated exact evaluations of the current direction field with
greedy improvement.  Iterates only ever decrease, and the fixed point
satisfies the one-step minimisation identity to solver tolerance.

The epsilon = 1 specialisation (plain decision trees) is handled
separately with exact rational arithmetic over partial assignments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .boolean_fn import (
    InputError,
    ResourceError,
    determination_table,
)

SWEEP_TOL = 1e-12
RESIDUAL_TOL = 1e-10
MAX_POLICY_ROUNDS = 500
MEMORY_ENV = "FRACQUERY_MEMORY_BUDGET_GIB"


class ConvergenceError(RuntimeError):
    """Solver failed to reach the fixed point within its round budget."""


def _memory_budget_bytes():
    gib = float(os.environ.get(MEMORY_ENV, "2.0"))
    return int(gib * (1 << 30))


@dataclass
class LatticeField:
    """Cost values on the lattice [-1,1]^n intersected with 2^-k Z^n.

    Values are stored flat with coordinate 0 least significant:
    flat = sum_i j_i * m^i where x_i = -1 + j_i * 2^-k and m = 2^(k+1)+1.
    """

    n: int
    k: int
    values: np.ndarray
    fn_id: str

    @property
    def m(self):
        return (1 << (self.k + 1)) + 1

    @property
    def epsilon(self):
        return 2.0 ** (-self.k)

    def flat_index(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputError("point has wrong dimension")
        eps = self.epsilon
        flat = 0
        scale = 1
        for i in range(self.n):
            j = round((x[i] + 1.0) / eps)
            if not 0 <= j < self.m or -1.0 + j * eps != x[i]:
                raise InputError(f"{x} is not on the 2^-{self.k} lattice")
            flat += j * scale
            scale *= self.m
        return flat

    def value_at(self, x):
        return float(self.values[self.flat_index(x)])

    def center_value(self):
        return self.value_at(np.zeros(self.n))


@dataclass
class Policy:
    """Argmin directions companion to a LatticeField; -1 where determined."""

    directions: np.ndarray


def _lattice_digits(n, m):
    """Per-axis lattice indices for every flat point, shape (m^n, n)."""
    size = m ** n
    flat = np.arange(size)
    digits = np.empty((size, n), dtype=np.int64)
    for i in range(n):
        digits[:, i] = (flat // m ** i) % m
    return digits


def _determination_status(f, n, m, digits):
    """Determination value (+-1, else 0) at every lattice point."""
    table = determination_table(f)
    tern = np.zeros(digits.shape[0], dtype=np.int64)
    for i in range(n):
        digit = np.ones(digits.shape[0], dtype=np.int64)
        digit[digits[:, i] == 0] = 0
        digit[digits[:, i] == m - 1] = 2
        tern += digit * 3 ** i
    return table[tern]


def _setup(f, k):
    """Shared grid scaffolding: boundary values from facet recursion,
    interior initialised at the read-everything upper bound."""
    n, m = f.n, (1 << (k + 1)) + 1
    eps = 2.0 ** (-k)
    size = m ** n
    digits = _lattice_digits(n, m)
    status = _determination_status(f, n, m, digits)

    u = np.zeros(size, dtype=np.float64)
    dirs = np.full(size, -1, dtype=np.int8)

    constant = f.determined(np.zeros(f.n)) is not None
    if constant:
        return dict(n=n, m=m, k=k, eps=eps, u=u, dirs=dirs, status=status,
                    digits=digits, interior=np.zeros(0, dtype=np.int64))

    # facets first: restrict, solve in dimension n-1, embed
    if n > 1:
        sub_digits = _lattice_digits(n - 1, m)
        for i in range(n):
            below = m ** i
            for side, jval in ((-1, 0), (1, m - 1)):
                sub = f.restrict(i, side)
                sub_field, sub_policy = solve(sub, k)
                lower = sub_digits[:, :i].dot(
                    m ** np.arange(i)) if i > 0 else 0
                upper = sub_digits[:, i:].dot(
                    m ** np.arange(i + 1, n)) if i < n - 1 else 0
                full = lower + jval * below + upper
                u[full] = sub_field.values
                sub_dirs = sub_policy.directions.astype(np.int8)
                remap = np.where(sub_dirs >= i, sub_dirs + 1, sub_dirs)
                remap[sub_dirs < 0] = -1
                dirs[full] = remap

    inner = np.all((digits >= 1) & (digits <= m - 2), axis=1)
    interior = np.nonzero(inner)[0]
    coords = -1.0 + digits[interior] * eps
    u[interior] = ((1.0 - coords ** 2).sum(axis=1))
    # determined points stay pinned at zero regardless
    u[status != 0] = 0.0
    dirs[status != 0] = -1

    return dict(n=n, m=m, k=k, eps=eps, u=u, dirs=dirs, status=status,
                digits=digits, interior=interior)


def _one_step_values(u, interior, strides, eps):
    """Value of jumping each direction from every interior point."""
    vals = np.empty((len(strides), interior.shape[0]), dtype=np.float64)
    for i, s in enumerate(strides):
        vals[i] = 0.5 * (u[interior + s] + u[interior - s]) + eps * eps
    return vals


def jacobi_iterates(f, k, sweeps):
    """Simultaneous sweeps of the one-step minimisation from the upper bound.

    Returns the list of full-grid iterates (first entry is the start).
    Useful as a monotonicity check; ``solve`` reaches the same fixed point
    by policy iteration instead.
    """
    ctx = _setup(f, k)
    u = ctx["u"].copy()
    interior = ctx["interior"]
    strides = [ctx["m"] ** i for i in range(ctx["n"])]
    out = [u.copy()]
    for _ in range(sweeps):
        if interior.shape[0]:
            vals = _one_step_values(u, interior, strides, ctx["eps"])
            u[interior] = vals.min(axis=0)
        out.append(u.copy())
    return out


def solve(f, k, budget_bytes=None, warm_start=True):
    """Optimal cost field and argmin policy for f at lattice level k.

    Levels above 3 warm-start their direction field from the next-coarser
    solve; the policy boundary then settles in a handful of improvement
    rounds instead of crawling cell by cell.
    """
    n, m = f.n, (1 << (k + 1)) + 1
    size = m ** n
    budget = budget_bytes if budget_bytes is not None else _memory_budget_bytes()
    if size * 48 > budget:
        raise ResourceError(
            f"lattice with {size} points exceeds the memory budget "
            f"({budget >> 20} MiB); raise {MEMORY_ENV} to override")

    ctx = _setup(f, k)
    u, dirs = ctx["u"], ctx["dirs"]
    interior, eps = ctx["interior"], ctx["eps"]
    if interior.shape[0] == 0:
        field = LatticeField(n=n, k=k, values=u, fn_id=f.name)
        return field, Policy(directions=dirs)

    strides = [m ** i for i in range(n)]
    nin = interior.shape[0]
    int_id = np.full(size, -1, dtype=np.int64)
    int_id[interior] = np.arange(nin)

    vals = _one_step_values(u, interior, strides, eps)
    sigma = vals.argmin(axis=0)
    if warm_start and k > 3:
        _, coarse = solve(f, k - 1, budget_bytes=budget_bytes)
        mc = (1 << k) + 1
        digits = ctx["digits"][interior]
        coarse_flat = np.zeros(nin, dtype=np.int64)
        scale = 1
        for i in range(n):
            jc = np.clip((digits[:, i] + 1) // 2, 0, mc - 1)
            coarse_flat += jc * scale
            scale *= mc
        guess = coarse.directions[coarse_flat]
        usable = guess >= 0
        sigma[usable] = guess[usable]

    for _ in range(MAX_POLICY_ROUNDS):
        # evaluate the current direction field exactly
        plus = interior + np.take(strides, sigma)
        minus = interior - np.take(strides, sigma)
        rhs = np.full(nin, eps * eps, dtype=np.float64)
        rows, cols, data = [np.arange(nin)], [np.arange(nin)], [np.ones(nin)]
        for nb in (plus, minus):
            ids = int_id[nb]
            inside = ids >= 0
            rows.append(np.nonzero(inside)[0])
            cols.append(ids[inside])
            data.append(np.full(int(inside.sum()), -0.5))
            rhs[~inside] += 0.5 * u[nb[~inside]]
        mat = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(nin, nin))
        u[interior] = spla.spsolve(mat, rhs)

        vals = _one_step_values(u, interior, strides, eps)
        best = vals.min(axis=0)
        cand = vals.argmin(axis=0)
        current = vals[sigma, np.arange(nin)]
        switch = current > best + 1e-13
        if not switch.any():
            break
        sigma[switch] = cand[switch]
    else:
        raise ConvergenceError(
            f"policy iteration did not settle in {MAX_POLICY_ROUNDS} rounds; "
            f"final residual {np.abs(current - best).max():.3e}")

    residual = np.abs(u[interior] - best).max()
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(
            f"fixed-point residual {residual:.3e} above {RESIDUAL_TOL}")

    dirs[interior] = sigma.astype(np.int8)
    field = LatticeField(n=n, k=k, values=u, fn_id=f.name)
    return field, Policy(directions=dirs)


def dp_residual(field, policy, f):
    """Max deviation from the one-step minimisation over live directions.

    Covers every undetermined lattice point, facets included (there the
    minimisation ranges over the facet's own live coordinates), and also
    checks that the stored policy direction attains the minimum.
    """
    m, n = field.m, field.n
    size = field.values.shape[0]
    digits = _lattice_digits(n, m)
    status = _determination_status(f, n, m, digits)
    eps = field.epsilon
    best = np.full(size, np.inf)
    stored = np.full(size, np.inf)
    has_live = np.zeros(size, dtype=bool)
    for i in range(n):
        stride = m ** i
        live = (digits[:, i] >= 1) & (digits[:, i] <= m - 2)
        idx = np.nonzero(live)[0]
        vals = 0.5 * (field.values[idx + stride]
                      + field.values[idx - stride]) + eps * eps
        np.minimum.at(best, idx, vals)
        has_live[idx] = True
        mine = policy.directions[idx] == i
        stored[idx[mine]] = vals[mine]
    check = has_live & (status == 0)
    if not check.any():
        return 0.0
    gap = np.abs(field.values[check] - best[check]).max()
    attain = np.abs(stored[check] - best[check]).max()
    return float(max(gap, attain))


def convergence_study(f, k_list):
    """u at the centre per level, successive differences, limit estimate."""
    rows = []
    prev = None
    for k in k_list:
        field, _ = solve(f, k)
        u0 = field.center_value()
        rows.append({
            "k": int(k),
            "epsilon": 2.0 ** (-k),
            "u_center": u0,
            "drop": None if prev is None else prev - u0,
        })
        prev = u0
    estimate = None
    if len(rows) >= 2:
        # assumes first-order decay of the remaining gap; estimate only
        estimate = 2.0 * rows[-1]["u_center"] - rows[-2]["u_center"]
    return {"function": f.name, "levels": rows, "limit_estimate": estimate}


# -- exact decision-tree costs (epsilon = 1) -----------------------------------


def _signs_code(signs, n):
    code = 0
    for i in range(n):
        code += (1 + int(signs[i])) * 3 ** i
    return code


def optimal_decision_tree_cost(f, start=None, state_budget=3 ** 16):
    """Expected queries of the best tree, exact rational arithmetic.

    ``start`` optionally gives a partial assignment in {-1,0,+1}^n to
    start from; default is everything unread.
    """
    n = f.n
    if 3 ** n > state_budget:
        raise ResourceError(f"3^{n} partial assignments exceed the budget")
    status = determination_table(f, cap=16)
    pow3 = [3 ** i for i in range(n)]
    memo = {}

    def cost(code):
        if status[code] != 0:
            return Fraction(0)
        hit = memo.get(code)
        if hit is not None:
            return hit
        best = None
        rem = code
        for i in range(n):
            digit = (code // pow3[i]) % 3
            if digit == 1:
                branch = 1 + Fraction(1, 2) * (
                    cost(code + pow3[i]) + cost(code - pow3[i]))
                if best is None or branch < best:
                    best = branch
        memo[code] = best
        return best

    if start is None:
        code0 = _signs_code([0] * n, n)
    else:
        code0 = _signs_code(start, n)
    return cost(code0)


def tree_strategy_cost(f, chooser, state_budget=3 ** 16):
    """Exact expected queries for a chooser over partial assignments.

    The chooser maps a sign tuple in {-1,0,+1}^n to a coordinate, or to a
    list of coordinates played uniformly at random.
    """
    cost, _ = tree_strategy_revealments(f, chooser, state_budget)
    return cost


def tree_strategy_revealments(f, chooser, state_budget=3 ** 16):
    """Exact (expected queries, per-coordinate read probabilities)."""
    n = f.n
    if 3 ** n > state_budget:
        raise ResourceError(f"3^{n} partial assignments exceed the budget")
    status = determination_table(f, cap=16)
    pow3 = [3 ** i for i in range(n)]
    memo = {}

    def stats(code, signs):
        if status[code] != 0:
            return (Fraction(0),) * (n + 1)
        hit = memo.get(code)
        if hit is not None:
            return hit
        picks = chooser(signs)
        if isinstance(picks, int):
            picks = [picks]
        total = [Fraction(0)] * (n + 1)
        for i in picks:
            if signs[i] != 0:
                raise InputError(f"chooser picked a set coordinate {i}")
            up = list(signs)
            up[i] = 1
            down = list(signs)
            down[i] = -1
            s_up = stats(code + pow3[i], tuple(up))
            s_down = stats(code - pow3[i], tuple(down))
            total[0] += 1 + Fraction(1, 2) * (s_up[0] + s_down[0])
            for j in range(n):
                read = Fraction(1) if j == i else Fraction(0)
                total[1 + j] += read + Fraction(1, 2) * (
                    s_up[1 + j] + s_down[1 + j])
        result = tuple(t / len(picks) for t in total)
        memo[code] = result
        return result

    start = (0,) * n
    out = stats(_signs_code(start, n), start)
    return out[0], list(out[1:])


def _restricted_table(f, signs):
    """Truth table of f with the +-1 entries of ``signs`` fixed."""
    n = f.n
    cube = f.dense_table().reshape((2,) * n)
    index = tuple(
        slice(None) if signs[n - 1 - ax] == 0 else (1 + signs[n - 1 - ax]) // 2
        for ax in range(n)
    )
    return cube[index].reshape(-1)


def max_influence_chooser(f, ties="low"):
    """Chooser reading a maximum-influence variable of the restriction.

    ``ties`` picks the lowest index ("low") or averages uniformly over
    the whole argmax set ("uniform").
    """
    if ties not in ("low", "uniform"):
        raise InputError("ties must be 'low' or 'uniform'")

    def chooser(signs):
        unset = [i for i, s in enumerate(signs) if s == 0]
        sub = _restricted_table(f, signs)
        u = len(unset)
        best = None
        arg = []
        for pos, i in enumerate(unset):
            halves = sub.reshape(-1, 2, 1 << pos)
            diff = int((halves[:, 0, :] != halves[:, 1, :]).sum())
            inf = Fraction(diff, 1 << (u - 1)) if u else Fraction(0)
            if best is None or inf > best:
                best = inf
                arg = [i]
            elif inf == best:
                arg.append(i)
        return arg[0] if ties == "low" else arg

    return chooser


def random_unread_chooser(signs):
    """Chooser playing a uniformly random unread coordinate."""
    return [i for i, s in enumerate(signs) if s == 0]


# -- serialization ---------------------------------------------------------------


def save_field(field, policy, path):
    """Dump a solved field; .npz binary or .csv rows per lattice point."""
    if str(path).endswith(".npz"):
        np.savez_compressed(
            path, n=field.n, k=field.k, fn_id=np.str_(field.fn_id),
            values=field.values, directions=policy.directions)
        return
    digits = _lattice_digits(field.n, field.m)
    coords = -1.0 + digits * field.epsilon
    with open(path, "w") as fh:
        fh.write(f"# n={field.n} k={field.k} function={field.fn_id}\n")
        cols = ",".join(f"x{i + 1}" for i in range(field.n))
        fh.write(f"index,{cols},value,direction\n")
        for flat in range(field.values.shape[0]):
            xs = ",".join(format(c, ".17g") for c in coords[flat])
            fh.write(f"{flat},{xs},{field.values[flat]:.17g},"
                     f"{policy.directions[flat]}\n")


def load_field(path):
    """Inverse of ``save_field`` for the .npz format."""
    if not str(path).endswith(".npz"):
        raise InputError("load_field reads the .npz dump format")
    data = np.load(path, allow_pickle=False)
    field = LatticeField(n=int(data["n"]), k=int(data["k"]),
                         values=data["values"], fn_id=str(data["fn_id"]))
    return field, Policy(directions=data["directions"])
