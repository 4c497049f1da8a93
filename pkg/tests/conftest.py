"""Shared brute-force oracles kept independent of the library internals."""

import itertools

import numpy as np
import pytest


def vertices(n):
    """All +-1 vertices in table order (bit i of the index is x_i sign)."""
    out = []
    for idx in range(1 << n):
        out.append([1.0 if (idx >> i) & 1 else -1.0 for i in range(n)])
    return np.array(out)


def brute_fourier(table, n):
    """Coefficient of each monomial by direct averaging over all vertices."""
    verts = vertices(n)
    coef = np.zeros(1 << n)
    for mask in range(1 << n):
        chi = np.ones(verts.shape[0])
        for i in range(n):
            if (mask >> i) & 1:
                chi *= verts[:, i]
        coef[mask] = np.mean(table * chi)
    return coef


def brute_harmonic(table, n, x):
    """Multilinear extension as an explicit monomial sum."""
    coef = brute_fourier(table, n)
    total = 0.0
    for mask in range(1 << n):
        term = coef[mask]
        for i in range(n):
            if (mask >> i) & 1:
                term *= x[i]
        total += term
    return total


def brute_restriction_constant(table, n, signs):
    """Is the function constant once the +-1 entries of signs are fixed?"""
    vals = set()
    for assign in itertools.product((-1.0, 1.0), repeat=n):
        if any(s != 0 and assign[i] != s for i, s in enumerate(signs)):
            continue
        idx = sum(1 << i for i in range(n) if assign[i] > 0)
        vals.add(float(table[idx]))
    return vals.pop() if len(vals) == 1 else None


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
