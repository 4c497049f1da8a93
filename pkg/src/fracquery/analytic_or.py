"""Closed-form limiting cost of the two-bit OR, with residual verifiers.

On the diagonal the cost is g(x) = 2 (1-x)^2 log(2/(1-x)); off the diagonal
the value interpolates linearly between the diagonal and the boundary along
the optimal (largest-coordinate) direction.  The diagonal function solves
g' + 2 g / (1-x) = 2 (1-x), and the full surface has minimum second
derivative -2 away from the diagonal kink, which the finite-difference
residual check below verifies.
"""

from __future__ import annotations

import math

import numpy as np

from .boolean_fn import InputError


def g_diag(x):
    """Diagonal cost g(x); natural logarithm, g(-1) = g(1) = 0."""
    if not -1.0 <= x <= 1.0:
        raise InputError("diagonal point must lie in [-1, 1]")
    if x == 1.0:
        return 0.0
    one = 1.0 - x
    return 2.0 * one * one * math.log(2.0 / one)


def g_diag_deriv(x):
    """Analytic derivative of the diagonal cost."""
    if not -1.0 <= x < 1.0:
        raise InputError("derivative needs x in [-1, 1)")
    one = 1.0 - x
    return -4.0 * one * math.log(2.0 / one) + 2.0 * one


def ode_residual(x):
    """g'(x) + 2 g(x)/(1-x) - 2(1-x); zero when g solves its equation."""
    return g_diag_deriv(x) + 2.0 * g_diag(x) / (1.0 - x) - 2.0 * (1.0 - x)


def u_or2(x1, x2):
    """Limiting optimal cost of the two-bit OR at (x1, x2).

    Symmetric in its arguments.  For x2 > x1 the process rides coordinate 2
    to the boundary or back to the diagonal, making the value a convex
    combination of the boundary cost (1-x2)^2 and the diagonal value plus
    the travel cost (x2-x1)^2.
    """
    if not (-1.0 <= x1 <= 1.0 and -1.0 <= x2 <= 1.0):
        raise InputError("point must lie in [-1,1]^2")
    if x1 > x2:
        x1, x2 = x2, x1
    if x1 == x2:
        return g_diag(x1)
    if x1 == 1.0:
        return 0.0
    lam = (x2 - x1) / (1.0 - x1)
    up = (1.0 - x2) ** 2
    down = g_diag(x1) + (x2 - x1) ** 2
    return lam * up + (1.0 - lam) * down


def laplacian_residual(x1, x2, h=1e-3):
    """Minimum second central difference plus two; small off the diagonal.

    The surface is only piecewise smooth, so the stencil must stay away
    from the diagonal (|x1 - x2| >= 0.05) and inside the square.
    """
    if abs(x1 - x2) < 0.05:
        raise InputError("stencil too close to the diagonal kink")
    if abs(x1) + h > 1.0 or abs(x2) + h > 1.0:
        raise InputError("stencil leaves the square")
    d1 = (u_or2(x1 + h, x2) - 2.0 * u_or2(x1, x2) + u_or2(x1 - h, x2)) / (h * h)
    d2 = (u_or2(x1, x2 + h) - 2.0 * u_or2(x1, x2) + u_or2(x1, x2 - h)) / (h * h)
    return min(d1, d2) + 2.0


def grid_dump(m, fh):
    """CSV of the closed form on an m-by-m grid, for plotting."""
    xs = np.linspace(-1.0, 1.0, m)
    fh.write("x1,x2,u\n")
    for a in xs:
        for b in xs:
            fh.write(f"{a:.17g},{b:.17g},{u_or2(float(a), float(b)):.17g}\n")
