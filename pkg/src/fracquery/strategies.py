"""Direction-choosing strategies behind one ``decide`` interface.

A strategy picks which coordinate to jump next.  Markov strategies look only
at the current position; the tree heuristics additionally carry per-run
frozen choices (taken from the run's own random stream, so runs stay
reproducible).  ``decide`` may return None, a lazy no-op that advances time
without moving.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .boolean_fn import BooleanFunction, Gate, InputError, Leaf, _status_node


class Strategy:
    """Base: subclasses set ``id`` and implement ``decide``."""

    id = "strategy"
    markov = True
    monotone_required = False

    def start_run(self, f, rng):
        return None

    def decide(self, f, position, t, rng, ctx=None):
        raise NotImplementedError

    def kernel_spec(self, f):
        """Kernel opcode and arguments, or None when not kernelizable."""
        return None


def _live(position):
    return [i for i in range(len(position)) if -1.0 < position[i] < 1.0]


class SMax(Strategy):
    """Move the largest live coordinate (ties to the lowest index)."""

    id = "s_max"

    def decide(self, f, position, t, rng, ctx=None):
        best = -2.0
        pick = -1
        for i in range(len(position)):
            if -1.0 < position[i] < 1.0 and position[i] > best:
                best = position[i]
                pick = i
        if pick < 0:
            raise InputError("all coordinates are frozen")
        return pick

    def kernel_spec(self, f):
        return {"code": _kernels.STRAT_S_MAX}


class MaxDerivative(Strategy):
    """Move the live coordinate with the largest discrete derivative."""

    id = "max_derivative"
    monotone_required = True

    def decide(self, f, position, t, rng, ctx=None):
        live = _live(position)
        if not live:
            raise InputError("all coordinates are frozen")
        best = None
        pick = -1
        for i in live:
            d = f.derivative(i, position)
            if best is None or d > best:
                best = d
                pick = i
        return pick

    def kernel_spec(self, f):
        if f.n > 10:
            return None
        coef = f.fourier().coef
        nz = np.nonzero(np.abs(coef) > 1e-14)[0]
        nz = nz[nz != 0]
        return {
            "code": _kernels.STRAT_MAX_DERIV,
            "masks": nz.astype(np.int64),
            "coefs": coef[nz],
        }


class RandomUnread(Strategy):
    """Pick uniformly among live coordinates."""

    id = "random_unread"
    markov = False

    def decide(self, f, position, t, rng, ctx=None):
        live = _live(position)
        if not live:
            raise InputError("all coordinates are frozen")
        u = rng.random()
        k = int(u * len(live))
        if k == len(live):
            k -= 1
        return live[k]

    def kernel_spec(self, f):
        return {"code": _kernels.STRAT_RANDOM}


class MiddleBit(Strategy):
    """Move the coordinate holding the median value of the whole position.

    Frozen coordinates participate in the ranking, so on 3-majority the
    median is always live while the function is undetermined: an absorbed
    coordinate sits at an extreme and the median lands on the right bit of
    the reduced OR or AND.  Should the median be frozen anyway, the nearest
    live rank wins (preferring the larger side, lower median for even n).
    """

    id = "middle_bit"

    def decide(self, f, position, t, rng, ctx=None):
        n = len(position)
        order = sorted(range(n), key=lambda i: (position[i], i))
        mid = (n - 1) // 2
        ranks = [mid]
        for d in range(1, n):
            if mid + d < n:
                ranks.append(mid + d)
            if mid - d >= 0:
                ranks.append(mid - d)
        for r in ranks:
            i = order[r]
            if -1.0 < position[i] < 1.0:
                return i
        raise InputError("all coordinates are frozen")

    def kernel_spec(self, f):
        return {"code": _kernels.STRAT_MIDDLE}


class DpPolicy(Strategy):
    """Replay the argmin directions of a solved lattice cost field."""

    def __init__(self, field, policy, source=""):
        self.field = field
        self.policy = policy
        self.id = f"dp_policy:{source}" if source else "dp_policy"

    def decide(self, f, position, t, rng, ctx=None):
        flat = self.field.flat_index(position)
        d = int(self.policy.directions[flat])
        if d < 0:
            raise InputError(
                f"no stored direction at {position} (point is determined)")
        return d

    def kernel_spec(self, f):
        return {
            "code": _kernels.STRAT_DP_POLICY,
            "policy": self.policy.directions.astype(np.int32),
            "lattice_m": self.field.m,
        }


# -- composite-tree heuristics ---------------------------------------------------


def or_block_choice(costs, g_values):
    """Index of the block an OR-of-blocks strategy should work on next.

    Blocks are compared through cost/(1 + g): cheaper-to-finish and
    more-likely-true blocks win.  A block whose value is already forced
    to -1 drops out (its ratio is treated as infinite); ties go to the
    lowest index.
    """
    best = None
    pick = -1
    for j, (c, g) in enumerate(zip(costs, g_values)):
        if g == -1.0:
            continue
        ratio = c / (1.0 + g)
        if best is None or ratio < best:
            best = ratio
            pick = j
    if pick < 0:
        raise InputError("every block is already determined")
    return pick


def _subtree_indices(node, out):
    if isinstance(node, Leaf):
        out.append(node.index)
    else:
        for c in node.children:
            _subtree_indices(c, out)


def _block_weight(node, position):
    lo, hi = node.span
    w = 0.0
    for i in range(lo, hi):
        w += position[i] * position[i]
    return (hi - lo) - w


def _preorder(node, acc):
    acc.append(node)
    if isinstance(node, Gate):
        for c in node.children:
            _preorder(c, acc)


class _FrozenChoices:
    """Per-run child picks for 3-way majority nodes, one draw per node."""

    def __init__(self, root, rng):
        nodes = []
        _preorder(root, nodes)
        self.pick = {}
        for node in nodes:
            if isinstance(node, Gate) and node.kind == "maj3":
                u = rng.random()
                k = int(u * 3)
                self.pick[id(node)] = min(k, 2)


class TreeHeuristic(Strategy):
    """Recursive block chooser for composite functions.

    At an OR (or AND) node the undetermined children are ranked by the
    remaining-mass ratio (block size minus squared norm, over one plus or
    minus the child's harmonic value); at a 3-majority node with no child
    settled yet, a per-run frozen random child is explored first.  Once a
    majority child settles, the node behaves as an OR or an AND of the two
    remaining children.
    """

    id = "itmaj"
    markov = False

    def start_run(self, f, rng):
        if f.root is None:
            raise InputError(f"{self.id} needs a composite function")
        return _FrozenChoices(f.root, rng)

    def decide(self, f, position, t, rng, ctx=None):
        signs = np.zeros(len(position), dtype=np.int8)
        for i, xi in enumerate(position):
            if xi == 1.0:
                signs[i] = 1
            elif xi == -1.0:
                signs[i] = -1
        return self._descend(f.root, position, signs, ctx)

    def _descend(self, node, x, signs, ctx):
        if isinstance(node, Leaf):
            return node.index
        if node.kind == "not":
            return self._descend(node.children[0], x, signs, ctx)
        stats = [_status_node(c, signs) for c in node.children]
        undet = [c for c, s in zip(node.children, stats) if s is None]
        if node.kind == "maj3" and len(undet) == 3:
            child = node.children[ctx.pick[id(node)]] if ctx else node.children[0]
            return self._descend(child, x, signs, ctx)
        if len(undet) == 1:
            return self._descend(undet[0], x, signs, ctx)
        if node.kind == "and" or (node.kind == "maj3" and -1 in stats):
            flip = -1.0
        else:
            flip = 1.0
        costs = [_block_weight(c, x) for c in undet]
        gvals = [flip * _harmonic(c, x) for c in undet]
        pick = or_block_choice(costs, gvals)
        return self._descend(undet[pick], x, signs, ctx)


def _harmonic(node, x):
    from .boolean_fn import _harmonic_node

    return _harmonic_node(node, x)


class OrHeuristic(Strategy):
    """Block chooser for OR-of-functions with an exact or proxy cost model.

    The exact model ranks blocks by their solved optimal-cost fields and
    then follows the chosen block's own lattice policy; the proxy model
    uses block size minus squared norm and recurses structurally.
    """

    markov = False

    def __init__(self, mode="proxy", k=None):
        if mode not in ("exact", "proxy"):
            raise InputError("or_heuristic mode must be exact or proxy")
        self.mode = mode
        self.k = k
        self.id = f"or_heuristic:{mode}"
        self._fields = None
        self._proxy = TreeHeuristic()
        self._proxy.id = self.id

    def start_run(self, f, rng):
        root = f.root
        if root is None or not isinstance(root, Gate) or root.kind != "or":
            raise InputError("or_heuristic needs a composite OR at the root")
        if self.mode == "proxy":
            return self._proxy.start_run(f, rng)
        if self._fields is None:
            from . import dp

            if self.k is None:
                raise InputError("exact cost model needs a lattice level k")
            self._fields = []
            for child in root.children:
                sub = subtree_function(child)
                self._fields.append(dp.solve(sub, self.k))
        return self._proxy.start_run(f, rng)

    def decide(self, f, position, t, rng, ctx=None):
        if self.mode == "proxy":
            return self._proxy.decide(f, position, t, rng, ctx)
        root = f.root
        signs = np.zeros(len(position), dtype=np.int8)
        for i, xi in enumerate(position):
            if xi == 1.0:
                signs[i] = 1
            elif xi == -1.0:
                signs[i] = -1
        costs = []
        gvals = []
        blocks = []
        for child, (field, policy) in zip(root.children, self._fields):
            lo, hi = child.span
            status = _status_node(child, signs)
            if status is not None:
                costs.append(0.0)
                gvals.append(float(status))
                blocks.append(None)
                continue
            sub_x = position[lo:hi]
            costs.append(field.value_at(sub_x))
            gvals.append(_harmonic(child, position))
            blocks.append((lo, field, policy, sub_x))
        pick = or_block_choice(costs, gvals)
        lo, field, policy, sub_x = blocks[pick]
        flat = field.flat_index(sub_x)
        return lo + int(policy.directions[flat])


def subtree_function(node):
    """Standalone function computed by a subtree, leaves renumbered to 0."""
    lo, hi = node.span
    shifted = _shift_node(node, lo)
    return BooleanFunction(hi - lo, root=shifted, name=f"subtree[{lo}:{hi}]")


def _shift_node(node, lo):
    if isinstance(node, Leaf):
        return Leaf(node.index - lo)
    return Gate(node.kind, tuple(_shift_node(c, lo) for c in node.children))


def from_id(strategy_id, k=None):
    """Resolve a strategy id; dp_policy ids name a saved field file."""
    if strategy_id == "s_max":
        return SMax()
    if strategy_id == "max_derivative":
        return MaxDerivative()
    if strategy_id == "random_unread":
        return RandomUnread()
    if strategy_id == "middle_bit":
        return MiddleBit()
    if strategy_id == "itmaj":
        return TreeHeuristic()
    if strategy_id.startswith("or_heuristic"):
        mode = strategy_id.split(":", 1)[1] if ":" in strategy_id else "proxy"
        return OrHeuristic(mode=mode, k=k)
    if strategy_id.startswith("dp_policy"):
        from . import dp

        if ":" not in strategy_id:
            raise InputError(
                "dp_policy needs a source, e.g. dp_policy:<field-file>")
        source = strategy_id.split(":", 1)[1]
        field, policy = dp.load_field(source)
        return DpPolicy(field, policy, source=source)
    raise InputError(
        f"unknown strategy id {strategy_id!r}; known: s_max, max_derivative, "
        "random_unread, middle_bit, itmaj, or_heuristic:<mode>, "
        "dp_policy:<field-file>")
