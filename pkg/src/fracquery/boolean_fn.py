"""Boolean functions f:{-1,1}^n -> R with Fourier analysis on the solid cube.

A function is stored either as a dense truth table (2^n reals) or as a
composition tree of OR/AND/MAJ3/NOT gates over disjoint, contiguous variable
blocks.  The multilinear (harmonic) extension, discrete derivatives,
influences and restrictions are all available through one class.

Table index convention: bit i of the table index is 0 when x_i = -1 and 1
when x_i = +1, so index ``sum((1 + x_i) / 2 * 2**i)``.  Coordinate indices
are 0-based in code; string ids in the function zoo use 1-based bit numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

DENSE_CAP = 24

_GATE_KINDS = ("or", "and", "maj3", "not")


class InputError(ValueError):
    """Rejected input: malformed table, tree or out-of-range coordinate."""


class ResourceError(RuntimeError):
    """Operation exceeds a configured size cap (dense expansion, memory)."""


@dataclass(frozen=True)
class Leaf:
    index: int

    @property
    def span(self):
        return (self.index, self.index + 1)


@dataclass(frozen=True)
class Gate:
    kind: str
    children: tuple

    @property
    def span(self):
        return (self.children[0].span[0], self.children[-1].span[1])


def _validate_node(node):
    """Check arities and that children cover disjoint contiguous blocks."""
    if isinstance(node, Leaf):
        if node.index < 0:
            raise InputError("leaf index must be non-negative")
        return
    if not isinstance(node, Gate):
        raise InputError(f"unknown node type {type(node)!r}")
    if node.kind not in _GATE_KINDS:
        raise InputError(f"unknown gate kind {node.kind!r}")
    m = len(node.children)
    if node.kind == "maj3" and m != 3:
        raise InputError("maj3 gate needs exactly 3 children")
    if node.kind == "not" and m != 1:
        raise InputError("not gate needs exactly 1 child")
    if node.kind in ("or", "and") and m < 2:
        raise InputError(f"{node.kind} gate needs at least 2 children")
    pos = node.children[0].span[0]
    for child in node.children:
        _validate_node(child)
        lo, hi = child.span
        if lo != pos:
            raise InputError("children must occupy disjoint contiguous blocks")
        pos = hi


class FourierTable:
    """Multilinear coefficients of a function, indexed by subset bitmask."""

    def __init__(self, n, coef):
        self.n = n
        self.coef = np.asarray(coef, dtype=np.float64)
        if self.coef.shape != (1 << n,):
            raise InputError("coefficient array must have length 2^n")

    def __getitem__(self, mask):
        return float(self.coef[mask])

    def norm_sq(self):
        """Squared 2-norm, sum of squared coefficients (Parseval)."""
        return float(np.dot(self.coef, self.coef))

    def variance(self):
        return self.norm_sq() - float(self.coef[0]) ** 2

    def level_weight(self, k):
        masks = np.arange(1 << self.n)
        sel = _popcount(masks) == k
        return float(np.dot(self.coef[sel], self.coef[sel]))

    def degree(self, tol=1e-12):
        masks = np.arange(1 << self.n)
        nz = np.abs(self.coef) > tol
        if not nz.any():
            return 0
        return int(_popcount(masks[nz]).max())

    def inverse(self):
        """Truth table reconstructed from the coefficients."""
        return _wht(self.coef * _level_signs(self.n))

    def as_dict(self, tol=0.0):
        return {
            int(m): float(c)
            for m, c in enumerate(self.coef)
            if abs(c) > tol or tol == 0.0
        }


def _popcount(masks):
    return np.bitwise_count(np.asarray(masks, dtype=np.uint64)).astype(np.int64)


def _level_signs(n):
    masks = np.arange(1 << n)
    return np.where(_popcount(masks) % 2 == 0, 1.0, -1.0)


def _wht(vec):
    """In-place style fast Walsh-Hadamard transform, returns a new array."""
    a = np.array(vec, dtype=np.float64, copy=True)
    h = 1
    size = a.shape[0]
    while h < size:
        a = a.reshape(-1, 2, h)
        lo = a[:, 0, :].copy()
        hi = a[:, 1, :].copy()
        a[:, 0, :] = lo + hi
        a[:, 1, :] = lo - hi
        a = a.reshape(size)
        h *= 2
    return a


class BooleanFunction:
    """A Boolean function with dense and/or composite representation."""

    def __init__(self, n, table=None, root=None, name=None):
        if n < 1:
            raise InputError("need at least one variable")
        self.n = n
        self.table = None
        self.root = root
        self.name = name or (f"dense:{n}" if root is None else "composite")
        if table is not None:
            table = np.asarray(table, dtype=np.float64)
            if table.shape != (1 << n,):
                raise InputError(
                    f"table length {table.shape} does not match 2^{n}"
                )
            self.table = table
        if root is not None:
            _validate_node(root)
            lo, hi = root.span
            if lo != 0 or hi != n:
                raise InputError("tree must cover variables [0, n)")
        if self.table is None and self.root is None:
            raise InputError("need a table or a tree")
        self._fourier = None

    # -- representation ----------------------------------------------------

    def is_dense(self):
        return self.table is not None

    def dense_table(self, cap=DENSE_CAP):
        """Truth table of the function, expanding a composite if needed."""
        if self.table is None:
            if self.n > cap:
                raise ResourceError(
                    f"dense expansion of {self.n} variables exceeds cap {cap}"
                )
            self.table = _expand(self.root)
        return self.table

    def densified(self, cap=DENSE_CAP):
        return BooleanFunction(self.n, table=self.dense_table(cap), name=self.name)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, x):
        """Value at a hypercube vertex (entries +-1)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,) or not np.all(np.abs(x) == 1.0):
            raise InputError("evaluate needs a +-1 vertex of the right size")
        if self.table is not None:
            idx = 0
            for i in range(self.n):
                if x[i] > 0:
                    idx |= 1 << i
            return float(self.table[idx])
        return _eval_node(self.root, x)

    def harmonic(self, x):
        """Multilinear extension at a point of the solid cube [-1,1]^n."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputError("point has wrong dimension")
        if np.any(np.abs(x) > 1.0):
            raise InputError("point lies outside [-1,1]^n")
        if self.root is not None and self.table is None:
            return _harmonic_node(self.root, x)
        vals = self.table
        for i in range(self.n):
            # lowest remaining axis is coordinate i after earlier folds
            vals = vals.reshape(-1, 2)
            wm = (1.0 - x[i]) / 2.0
            wp = (1.0 + x[i]) / 2.0
            vals = wm * vals[:, 0] + wp * vals[:, 1]
        return float(vals[0])

    def derivative(self, i, x):
        """Discrete derivative in direction i at x, half the +-1 gap."""
        if not 0 <= i < self.n:
            raise InputError(f"coordinate {i} out of range")
        x = np.asarray(x, dtype=np.float64)
        hi = x.copy()
        hi[i] = 1.0
        lo = x.copy()
        lo[i] = -1.0
        return (self.harmonic(hi) - self.harmonic(lo)) / 2.0

    # -- Fourier ------------------------------------------------------------

    def fourier(self, cap=DENSE_CAP):
        """Coefficient table ``chi_S -> 2^-n sum_x f(x) prod_{i in S} x_i``."""
        if self._fourier is None:
            table = self.dense_table(cap)
            coef = _wht(table) * _level_signs(self.n) / (1 << self.n)
            self._fourier = FourierTable(self.n, coef)
        return self._fourier

    def variance(self, cap=DENSE_CAP):
        return self.fourier(cap).variance()

    def level_weight(self, k, cap=DENSE_CAP):
        return self.fourier(cap).level_weight(k)

    def degree(self, cap=DENSE_CAP):
        return self.fourier(cap).degree()

    def influence(self, i, cap=DENSE_CAP):
        """Probability that flipping bit i changes the value."""
        if not 0 <= i < self.n:
            raise InputError(f"coordinate {i} out of range")
        table = self.dense_table(cap)
        if not np.all(np.abs(table) == 1.0):
            raise InputError("influence needs a +-1 valued function")
        flipped = table.reshape(-1, 2, 1 << i)[:, ::-1, :].reshape(-1)
        return float(np.mean(table != flipped))

    def is_monotone(self, cap=DENSE_CAP):
        if self.root is not None and self.table is None:
            return _monotone_node(self.root)
        table = self.dense_table(cap)
        for i in range(self.n):
            cube = table.reshape(-1, 2, 1 << i)
            if np.any(cube[:, 0, :] > cube[:, 1, :]):
                return False
        return True

    # -- restriction and determination ---------------------------------------

    def restrict(self, i, b):
        """Fix x_i = b, returning a function on the remaining n-1 variables."""
        if not 0 <= i < self.n:
            raise InputError(f"coordinate {i} out of range")
        if b not in (-1, 1):
            raise InputError("restriction value must be +-1")
        if self.n == 1:
            raise InputError("cannot restrict the last variable")
        table = self.dense_table()
        half = table.reshape(-1, 2, 1 << i)[:, (1 + b) // 2, :].reshape(-1)
        return BooleanFunction(self.n - 1, table=half,
                               name=f"{self.name}|x{i + 1}={b:+d}")

    def determined(self, x):
        """+1 or -1 when the coordinates of x sitting at +-1 force the value.

        The check is structural: the restriction of f to the revealed
        coordinates must be constant.  Interior coordinates may hold any
        value in (-1,1); no floating-point comparison of the extension is
        involved.  Returns None when the function is still undetermined.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputError("point has wrong dimension")
        if np.any(np.abs(x) > 1.0):
            raise InputError("point lies outside [-1,1]^n")
        signs = np.zeros(self.n, dtype=np.int8)
        signs[x == 1.0] = 1
        signs[x == -1.0] = -1
        return self.determined_signs(signs)

    def determined_signs(self, signs):
        """Determination status from a vector in {-1,0,+1}, 0 meaning unset."""
        if self.root is not None and self.table is None:
            return _status_node(self.root, signs)
        table = self.dense_table()
        cube = table.reshape((2,) * self.n)
        # axis order of reshape is reversed relative to bit index
        index = tuple(
            slice(None) if signs[self.n - 1 - ax] == 0
            else (1 + int(signs[self.n - 1 - ax])) // 2
            for ax in range(self.n)
        )
        sub = cube[index]
        lo, hi = sub.min(), sub.max()
        if lo == hi and lo in (-1.0, 1.0):
            return int(lo)
        if lo == hi:
            # constant but not +-1 valued; still determined, report the sign
            return int(np.sign(lo)) if lo != 0 else None
        return None

    # -- interpolation --------------------------------------------------------

    def interpolate(self, x, cap=DENSE_CAP):
        """Coefficients after substituting y_i -> sqrt(1-x_i^2) y_i + x_i.

        The empty-set coefficient of the result equals the harmonic extension
        at x, which is the identity the substitution is designed around.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputError("point has wrong dimension")
        if np.any(np.abs(x) > 1.0):
            raise InputError("point lies outside [-1,1]^n")
        coef = self.fourier(cap).coef.copy()
        for i in range(self.n):
            s = float(np.sqrt(1.0 - x[i] * x[i]))
            view = coef.reshape(-1, 2, 1 << i)
            with_i = view[:, 1, :].copy()
            view[:, 0, :] += x[i] * with_i
            view[:, 1, :] = s * with_i
        return FourierTable(self.n, coef)

    def __repr__(self):
        kind = "dense" if self.root is None else "composite"
        return f"BooleanFunction({self.name!r}, n={self.n}, {kind})"


# -- composite helpers ---------------------------------------------------------


def _eval_node(node, x):
    if isinstance(node, Leaf):
        return float(x[node.index])
    vals = [_eval_node(c, x) for c in node.children]
    if node.kind == "not":
        return -vals[0]
    if node.kind == "or":
        return float(max(vals))
    if node.kind == "and":
        return float(min(vals))
    return float(np.sign(sum(vals)))


def _harmonic_node(node, x):
    # children act on disjoint variables, so expectations factor through gates
    if isinstance(node, Leaf):
        return float(x[node.index])
    vals = [_harmonic_node(c, x) for c in node.children]
    if node.kind == "not":
        return -vals[0]
    if node.kind == "or":
        prod = reduce(lambda a, b: a * b, ((1.0 - v) / 2.0 for v in vals))
        return 1.0 - 2.0 * prod
    if node.kind == "and":
        prod = reduce(lambda a, b: a * b, ((1.0 + v) / 2.0 for v in vals))
        return 2.0 * prod - 1.0
    a, b, c = vals
    return 0.5 * (a + b + c - a * b * c)


def _status_node(node, signs):
    if isinstance(node, Leaf):
        s = int(signs[node.index])
        return s if s != 0 else None
    stats = [_status_node(c, signs) for c in node.children]
    if node.kind == "not":
        return None if stats[0] is None else -stats[0]
    if node.kind == "or":
        if any(s == 1 for s in stats):
            return 1
        return -1 if all(s == -1 for s in stats) else None
    if node.kind == "and":
        if any(s == -1 for s in stats):
            return -1
        return 1 if all(s == 1 for s in stats) else None
    pos = sum(1 for s in stats if s == 1)
    neg = sum(1 for s in stats if s == -1)
    if pos >= 2:
        return 1
    if neg >= 2:
        return -1
    return None


def _monotone_node(node):
    if isinstance(node, Leaf):
        return True
    if node.kind == "not":
        return False
    return all(_monotone_node(c) for c in node.children)


def _expand(node):
    if isinstance(node, Leaf):
        return np.array([-1.0, 1.0])
    parts = [_expand(c) for c in node.children]
    if node.kind == "not":
        return -parts[0]
    acc = parts[0]
    if node.kind == "maj3":
        b, c = parts[1], parts[2]
        sa, sb = acc.shape[0], b.shape[0]
        total = sa * sb * c.shape[0]
        aa = np.tile(acc, total // sa)
        bb = np.tile(np.repeat(b, sa), c.shape[0])
        cc = np.repeat(c, sa * sb)
        return np.sign(aa + bb + cc)
    op = np.maximum if node.kind == "or" else np.minimum
    for part in parts[1:]:
        acc = op(np.tile(acc, part.shape[0]), np.repeat(part, acc.shape[0]))
    return acc


# -- determination table (ternary-indexed, used by the simulation kernels) -----


def determination_table(f, cap=12):
    """Status array over sign patterns in {-1,0,+1}^n, ternary-indexed.

    Entry d of the result is +-1 when fixing the pattern's revealed
    coordinates makes f constant, else 0.  Pattern digits: 0 -> x_i = -1,
    1 -> x_i unset, 2 -> x_i = +1, coordinate i at place value 3^i.
    """
    n = f.n
    if n > cap:
        raise ResourceError(f"determination table for n={n} exceeds cap {cap}")
    table = f.dense_table()
    size = 3 ** n
    status = np.zeros(size, dtype=np.int8)
    pow3 = [3 ** i for i in range(n)]

    # fully revealed patterns take the vertex value directly
    full = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        bit = (np.arange(1 << n) >> i) & 1
        full += bit * 2 * pow3[i]
    vertex_sign = np.sign(table).astype(np.int8)
    status[full] = vertex_sign

    codes = np.arange(size)
    digits = np.empty((size, n), dtype=np.int8)
    rem = codes.copy()
    for i in range(n):
        digits[:, i] = rem % 3
        rem //= 3
    unset_count = (digits == 1).sum(axis=1)
    first_unset = np.argmax(digits == 1, axis=1)

    for u in range(1, n + 1):
        rows = np.nonzero(unset_count == u)[0]
        i = first_unset[rows]
        step = np.power(3, i.astype(np.int64))
        minus = status[rows - step]
        plus = status[rows + step]
        agree = (minus == plus) & (minus != 0)
        status[rows[agree]] = minus[agree]
    return status


def signs_to_ternary(signs):
    """Ternary code of a sign pattern, digit (1 + s_i) at place 3^i."""
    code = 0
    for i, s in enumerate(signs):
        code += (1 + int(s)) * 3 ** i
    return code


# -- function zoo ---------------------------------------------------------------


def or_fn(n):
    if n == 1:
        return dictator(1, 0)
    root = Gate("or", tuple(Leaf(i) for i in range(n)))
    f = BooleanFunction(n, root=root, name=f"or:{n}")
    return f


def and_fn(n):
    if n == 1:
        return dictator(1, 0)
    root = Gate("and", tuple(Leaf(i) for i in range(n)))
    return BooleanFunction(n, root=root, name=f"and:{n}")


def parity_fn(n):
    if n > DENSE_CAP:
        raise ResourceError(f"parity on {n} bits exceeds the dense cap")
    idx = np.arange(1 << n)
    # the product of the +-1 entries flips sign with each bit set to -1
    zeros = n - _popcount(idx)
    table = np.where(zeros % 2 == 0, 1.0, -1.0)
    return BooleanFunction(n, table=table, name=f"parity:{n}")


def dictator(n, i):
    if not 0 <= i < n:
        raise InputError("dictator bit out of range")
    idx = np.arange(1 << n)
    table = np.where((idx >> i) & 1 == 1, 1.0, -1.0)
    return BooleanFunction(n, table=table, name=f"dictator:{n}:{i + 1}")


def _itmaj_node(k, offset):
    if k == 0:
        return Leaf(offset)
    width = 3 ** (k - 1)
    kids = tuple(_itmaj_node(k - 1, offset + j * width) for j in range(3))
    return Gate("maj3", kids)


def itmaj(k):
    if k < 1:
        raise InputError("iterated majority depth must be >= 1")
    return BooleanFunction(3 ** k, root=_itmaj_node(k, 0), name=f"itmaj:{k}")


def maj3():
    f = itmaj(1)
    f.name = "maj3"
    return f


def from_id(fn_id):
    """Resolve a function id like ``or:3``, ``itmaj:2`` or ``dense:<path>``."""
    parts = fn_id.split(":")
    kind = parts[0]
    try:
        if kind == "or":
            return or_fn(int(parts[1]))
        if kind == "and":
            return and_fn(int(parts[1]))
        if kind == "parity":
            return parity_fn(int(parts[1]))
        if kind == "maj3":
            return maj3()
        if kind == "itmaj":
            return itmaj(int(parts[1]))
        if kind == "dictator":
            return dictator(int(parts[1]), int(parts[2]) - 1)
        if kind == "dense":
            path = fn_id.split(":", 1)[1]
            values = np.loadtxt(path, dtype=np.float64).reshape(-1)
            n = int(values.shape[0]).bit_length() - 1
            if 1 << n != values.shape[0]:
                raise InputError(f"table in {path} must have 2^n lines")
            f = BooleanFunction(n, table=values, name=fn_id)
            return f
    except (IndexError, ValueError) as exc:
        raise InputError(f"malformed function id {fn_id!r}: {exc}") from exc
    raise InputError(
        f"unknown function id {fn_id!r}; known kinds: or, and, parity, "
        "maj3, itmaj, dictator, dense"
    )
