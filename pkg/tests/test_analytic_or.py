import math

import numpy as np
import pytest

from fracquery import analytic_or as ao
from fracquery import dp
from fracquery.boolean_fn import InputError, or_fn


def g_four_term(x):
    """Expanded form of the diagonal cost, used as an independent oracle."""
    one = 1.0 - x
    return (2.0 * one * one * math.log(2.0) + 4.0 * x * math.log(one)
            - 2.0 * x * x * math.log(one) - 2.0 * math.log(one))


def g_four_term_deriv(x):
    """Termwise derivative of the expanded form."""
    one = 1.0 - x
    return (-4.0 * one * math.log(2.0)
            + 4.0 * math.log(one) - 4.0 * x / one
            - 4.0 * x * math.log(one) + 2.0 * x * x / one
            + 2.0 / one)


def test_g_values():
    assert ao.g_diag(0.0) == pytest.approx(2 * math.log(2), abs=1e-15)
    assert ao.g_diag(-1.0) == 0.0
    assert ao.g_diag(1.0) == 0.0
    assert ao.g_diag(0.5) == pytest.approx(math.log(2), abs=1e-15)


def test_g_matches_four_term_form():
    for x in np.linspace(-0.999, 0.999, 500):
        assert ao.g_diag(float(x)) == pytest.approx(g_four_term(float(x)),
                                                    abs=1e-12)


def test_g_deriv_matches_termwise_oracle():
    for x in np.linspace(-0.99, 0.99, 200):
        assert ao.g_diag_deriv(float(x)) == pytest.approx(
            g_four_term_deriv(float(x)), abs=1e-10)


def test_g_nonnegative():
    xs = np.linspace(-1.0, 1.0, 1001)
    assert min(ao.g_diag(float(x)) for x in xs) >= 0.0


def test_ode_residual_small():
    assert abs(ao.ode_residual(0.0)) < 1e-10
    assert abs(ao.ode_residual(0.9)) < 1e-8
    for x in np.linspace(-0.95, 0.95, 100):
        assert abs(ao.ode_residual(float(x))) < 1e-10


def test_u_values():
    assert ao.u_or2(0.0, 0.5) == pytest.approx(
        0.5 * 0.25 + 0.5 * (2 * math.log(2) + 0.25), abs=1e-15)
    assert ao.u_or2(0.0, 0.5) == pytest.approx(0.943147, abs=1e-6)
    for x in (-0.3, 0.0, 0.99):
        assert ao.u_or2(x, 1.0) == 0.0
    assert ao.u_or2(-1.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    # the false facet is a one-bit problem: cost 1 - x^2
    for x in np.linspace(-1, 1, 21):
        assert ao.u_or2(-1.0, float(x)) == pytest.approx(1 - x ** 2,
                                                         abs=1e-12)


def test_u_symmetry_exact():
    gen = np.random.default_rng(3)
    for _ in range(200):
        a, b = gen.uniform(-1, 1, size=2)
        assert ao.u_or2(a, b) == ao.u_or2(b, a)


def test_u_continuous_at_diagonal():
    # gap bounded by the 1-norm Lipschitz constant (n + 3) / 2 = 2.5
    delta = 1e-6
    for x in np.linspace(-0.99, 0.95, 100):
        gap = abs(ao.u_or2(float(x) + delta, float(x)) - ao.g_diag(float(x)))
        assert gap <= 2.5 * delta + 1e-11


def test_laplacian_residual_off_diagonal():
    assert abs(ao.laplacian_residual(0.2, 0.6, 1e-3)) < 1e-3
    gen = np.random.default_rng(7)
    count = 0
    while count < 50:
        a, b = gen.uniform(-0.95, 0.95, size=2)
        if abs(a - b) < 0.05:
            continue
        assert abs(ao.laplacian_residual(float(a), float(b), 1e-3)) < 1e-3
        count += 1


def test_laplacian_residual_guards():
    with pytest.raises(InputError):
        ao.laplacian_residual(0.3, 0.31, 1e-3)
    with pytest.raises(InputError):
        ao.laplacian_residual(0.9995, 0.2, 1e-3)


def test_lattice_field_dominates_closed_form():
    field, _ = dp.solve(or_fn(2), 5)
    digits = dp._lattice_digits(2, field.m)
    xs = -1.0 + digits * field.epsilon
    ref = np.array([ao.u_or2(float(a), float(b)) for a, b in xs])
    gap = field.values - ref
    assert gap.min() > -1e-12
    center = field.center_value() - ao.u_or2(0.0, 0.0)
    assert 0.0 <= center <= 0.05


def test_grid_dump_format(tmp_path):
    path = tmp_path / "grid.csv"
    with open(path, "w") as fh:
        ao.grid_dump(5, fh)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x1,x2,u"
    assert len(lines) == 1 + 25
    mid = lines[1 + 2 * 5 + 2].split(",")
    assert float(mid[0]) == 0.0 and float(mid[1]) == 0.0
    assert float(mid[2]) == pytest.approx(2 * math.log(2), abs=1e-12)
