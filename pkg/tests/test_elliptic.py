import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from axiblow import specfun
from axiblow.elliptic import (
    BcSpec,
    EllipticSolver,
    ResonanceError,
    boundary_residuals,
    solve_decay_shift,
    solve_dirichlet,
    solve_exterior_neumann_robin,
    solve_interior_dirichlet_robin,
    solver_for,
)
from axiblow.grid import Grid
from axiblow.manufactured import L5_expr, manufactured, r, z

BETA_INT = specfun.interior_beta(1.0)

CASES = {
    "dirichlet": (BcSpec.dirichlet(), (1 - r**2) * sp.sin(sp.pi * z), None),
    "interior_robin": (
        BcSpec.interior_robin(BETA_INT),
        (1 - r**2) * sp.cos(r) * (1 - z) * sp.exp((1 - BETA_INT) * z),
        None,
    ),
    "exterior_robin": (BcSpec.exterior_robin(6.0), sp.exp(-3 * r**2) * sp.cos(sp.pi * z), 4.0),
    "decay_shift": (BcSpec.decay_shift(0.7), -0.7 * z + (1 - r**2) * sp.cos(sp.pi * z), None),
}


def _grid(N, r_max):
    return Grid.interior(N, N) if r_max is None else Grid.exterior(N, (N + 1) // 2, r_max=r_max)


def test_manufactured_helper():
    assert sp.simplify(L5_expr(r**2 + z**2) - 10) == 0
    psi, omega = manufactured("r**2*z")
    np.testing.assert_allclose(omega(np.array([0.0, 0.5]), np.array([1.0, 1.0])), [-8.0, -8.0])


@pytest.mark.parametrize("name", list(CASES))
def test_second_order_convergence(name):
    bc, expr, r_max = CASES[name]
    psi_fn, omega_fn = manufactured(expr)
    errs = []
    for N in (33, 65) if r_max is None else (129, 257):
        g = _grid(N, r_max)
        psi = EllipticSolver(g, bc).solve(g.sample(omega_fn))
        errs.append(np.max(np.abs(psi - g.sample(psi_fn))))
    assert math.log2(errs[0] / errs[1]) > 1.8


@pytest.mark.parametrize("name", list(CASES))
def test_boundary_conditions_hold(name):
    bc, expr, r_max = CASES[name]
    _, omega_fn = manufactured(expr)
    g = _grid(33, r_max)
    psi = solver_for(g, bc).solve(g.sample(omega_fn))
    res = boundary_residuals(g, psi, bc)
    for key, value in res.items():
        # Neumann rows are imposed through the cosine basis; the check uses a one-sided stencil
        assert value < (1e-4 if key.startswith("neumann") else 1e-9), key


def test_exterior_split_parts():
    g = Grid.exterior(65, 33, r_max=4.0)
    _, omega_fn = manufactured(CASES["exterior_robin"][1])
    omega = g.sample(omega_fn)
    solver = EllipticSolver(g, BcSpec.exterior_robin(6.0))
    psi1, psi2 = solver.solve_parts(omega)
    np.testing.assert_allclose(psi1[0], 0.0, atol=1e-14)
    assert np.max(np.abs(solver.discrete_L5(psi2))) < 1e-9
    np.testing.assert_allclose(psi1 + psi2, solver.solve(omega), atol=1e-13)


def test_profiles_agree():
    g = Grid.exterior(129, 65, r_max=4.0)
    _, omega_fn = manufactured(CASES["exterior_robin"][1])
    omega = g.sample(omega_fn)
    a = EllipticSolver(g, BcSpec.exterior_robin(6.0), profile="discrete").solve(omega)
    b = EllipticSolver(g, BcSpec.exterior_robin(6.0), profile="bessel").solve(omega)
    assert np.max(np.abs(a - b)) < 1e-3 * np.max(np.abs(a))
    with pytest.raises(ValueError, match="unknown profile"):
        EllipticSolver(g, BcSpec.exterior_robin(6.0), profile="nope")


def test_regime_domain_mismatch_and_resonance():
    with pytest.raises(ValueError, match="exterior"):
        EllipticSolver(Grid.interior(9, 9), BcSpec.exterior_robin(6.0))
    with pytest.raises(ValueError, match="interior"):
        EllipticSolver(Grid.exterior(9, 9), BcSpec.dirichlet())
    with pytest.raises(ResonanceError):
        EllipticSolver(Grid.interior(17, 17), BcSpec.interior_robin(specfun.lambda1()))


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.integers(0, 2**32 - 1),
)
def test_solvers_linear_with_small_residual(a, b, seed):
    rng = np.random.default_rng(seed)
    g_int, g_ext = Grid.interior(17, 17), Grid.exterior(17, 9, r_max=3.0)
    for g, solve in [
        (g_int, solve_dirichlet),
        (g_int, lambda grid, w: solve_interior_dirichlet_robin(grid, w, BETA_INT)),
        (g_ext, lambda grid, w: solve_exterior_neumann_robin(grid, w, 6.0)),
    ]:
        w1, w2 = rng.standard_normal(g.shape), rng.standard_normal(g.shape)
        lhs = solve(g, a * w1 + b * w2)
        rhs = a * solve(g, w1) + b * solve(g, w2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.max(np.abs(rhs))))
    solver = solver_for(g_int, BcSpec.dirichlet())
    w = rng.standard_normal(g_int.shape)
    assert solver.residual(solver.solve(w), w) < 1e-9 * np.max(np.abs(w))


def test_decay_shift_of_zero_vorticity_is_linear_profile():
    g = Grid.interior(17, 17)
    np.testing.assert_allclose(solve_decay_shift(g, g.zeros(), 1.5), -1.5 * g.Z, atol=1e-13)
