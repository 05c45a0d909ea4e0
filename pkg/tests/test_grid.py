import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axiblow.grid import Domain, DomainKind, Grid, diff_matrix, fd_weights, simpson_weights


def test_fd_weights_central_second_derivative():
    w = fd_weights(0.0, np.array([-1.0, 0.0, 1.0]), 2)
    np.testing.assert_allclose(w[2], [1.0, -2.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(w[1], [-0.5, 0.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(w[0], [0.0, 1.0, 0.0], atol=1e-14)


@given(st.lists(st.floats(-3, 3), min_size=5, max_size=5), st.integers(9, 40))
def test_diff_matrix_exact_on_quartics(coef, n):
    x = np.linspace(0.0, 1.0, n)
    p = np.polynomial.Polynomial(coef)
    np.testing.assert_allclose(diff_matrix(x, 1) @ p(x), p.deriv(1)(x), atol=1e-7)
    np.testing.assert_allclose(diff_matrix(x, 2) @ p(x), p.deriv(2)(x), atol=1e-5)


def test_diff_matrix_even_axis_uses_mirror():
    x = np.linspace(0.0, 1.0, 17)
    np.testing.assert_allclose(diff_matrix(x, 1, even_left=True) @ x**2, 2 * x, atol=1e-12)
    assert abs((diff_matrix(x, 1, even_left=True) @ np.cos(x))[0]) < 1e-14


def test_diff_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        diff_matrix(np.linspace(0, 1, 4), 2)
    with pytest.raises(ValueError):
        diff_matrix(np.linspace(0, 1, 20), 3)


@given(st.integers(4, 60), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_simpson_exact_for_cubics(n, coef):
    x = np.linspace(0.0, 2.0, n)
    p = np.polynomial.Polynomial(coef)
    P = p.integ()
    assert simpson_weights(x) @ p(x) == pytest.approx(P(2.0) - P(0.0), abs=1e-11)


def test_integrate_measure_and_modes():
    g = Grid.interior(33, 33)
    assert g.measure == pytest.approx(0.25, rel=1e-13)
    f = np.sin(np.pi * g.Z)
    assert g.integrate(f) == pytest.approx(0.25 * 2 / math.pi, rel=1e-5)


def test_apply_L5_polynomials_exact():
    g = Grid.interior(17, 17)
    np.testing.assert_allclose(g.apply_L5(g.R**2), 8.0, atol=1e-10)
    np.testing.assert_allclose(g.apply_L5(g.Z**2), 2.0, atol=1e-10)
    # r^-2 is the radial harmonic of L5; fourth-order stencils shrink the error ~16x per doubling
    errs = []
    for n in (33, 65):
        e = Grid.exterior(n, 17, r_max=3.0)
        errs.append(np.max(np.abs(e.apply_L5(e.R**-2))))
    assert errs[0] / errs[1] > 10


def test_grid_input_checks():
    g = Grid.interior(9, 9)
    with pytest.raises(ValueError, match="does not match"):
        g.integrate(np.zeros((9, 8)))
    with pytest.raises(ValueError, match="non-finite"):
        g.integrate(np.full((9, 9), np.nan))
    with pytest.raises(ValueError):
        Domain(1.0, 0.5, DomainKind.EXTERIOR)
    with pytest.raises(ValueError):
        Domain(0.0, 2.0, DomainKind.INTERIOR)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-2.0, 2.0))
def test_sparse_ops_match_dense(a, b):
    g = Grid.exterior(17, 9, r_max=2.0)
    f = np.exp(-a * g.R**2) * np.cos(b * g.Z)
    for name in ("Dr1", "Dr2", "Dz1", "Dz2"):
        v = f if name.startswith("Dr") else f.T
        np.testing.assert_allclose(g.sparse_ops[name] @ v, getattr(g, name) @ v, atol=1e-12)
