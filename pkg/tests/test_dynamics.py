import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axiblow.dynamics import (
    BlowupTerminated,
    DecayModel,
    DecayState,
    Model,
    PositivityError,
    StepControl,
    advance_model,
    canonical_exterior_data,
    rhs_model,
    run_decay,
    run_model,
    step_decay,
    step_model,
)
from axiblow.elliptic import BcSpec
from axiblow.grid import Grid
from axiblow.scenarios import decay_initial_data


@pytest.fixture(scope="module")
def coarse():
    g = Grid.exterior(65, 33, r_max=4.0)
    model = Model(g, BcSpec.exterior_robin(6.0))
    u0, omega0, psi0 = canonical_exterior_data(g, 3.0, 6.0, 2.0, 1.0)
    return g, model, model.state(0.0, u0, omega0), psi0


def test_step_control_validation():
    with pytest.raises(ValueError):
        StepControl(dt_min=0.0)
    with pytest.raises(ValueError):
        StepControl(cfl_c=1.5)


def test_canonical_data_is_consistent(coarse):
    g, model, state, psi0 = coarse
    assert np.max(np.abs(state.psi - psi0)) < 1e-2 * np.max(np.abs(psi0))
    assert np.all(state.u[:, 1:-1] > 0)
    assert np.all(state.u[:, [0, -1]] == 0)
    with pytest.raises(ValueError):
        canonical_exterior_data(Grid.interior(9, 9), 3.0, 1.0, 1.0, 1.0)


def test_zero_swirl_is_steady(coarse):
    g, model, state, _ = coarse
    s0 = model.state(0.0, g.zeros(), state.omega)
    du, domega = rhs_model(model, s0)
    assert np.max(np.abs(du)) == 0 and np.max(np.abs(domega)) == 0
    s1 = advance_model(model, s0, 0.1)
    np.testing.assert_array_equal(s1.omega, s0.omega)


def test_time_reversible(coarse):
    _, model, state, _ = coarse
    back = advance_model(model, advance_model(model, state, 1e-3), -1e-3)
    assert np.max(np.abs(back.u - state.u)) < 1e-9
    assert np.max(np.abs(back.omega - state.omega)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 4.0), st.floats(-6.0, 6.0))
def test_swirl_sign_and_log_rate(s, b):
    # u_t = 2 u psi_z keeps the sign of u and d/dt log(u^2) = 4 psi_z
    g = Grid.exterior(33, 17, r_max=3.0)
    model = Model(g, BcSpec.exterior_robin(6.0))
    u0, omega0, _ = canonical_exterior_data(g, 3.0, b, s, 1.0)
    st0 = model.state(0.0, u0, omega0)
    dt = 1e-4
    st1 = advance_model(model, st0, dt)
    assert np.all(st1.u[:, 1:-1] > 0)
    rate = (np.log(st1.u[:, 1:-1] ** 2) - np.log(st0.u[:, 1:-1] ** 2)) / dt
    psi_z = g.diff_z(st0.psi)[:, 1:-1]
    np.testing.assert_allclose(rate, 4 * psi_z, atol=1e-2 * (1 + np.max(np.abs(psi_z))))


def test_run_reaches_t_end_and_observer_sees_all(coarse):
    _, model, state, _ = coarse
    seen = []
    res = run_model(model, state, StepControl(), 0.05, lambda s, dt: seen.append((s.t, dt)))
    assert res.reason == "t_end reached"
    assert seen[0] == (0.0, 0.0)
    assert seen[-1][0] == pytest.approx(0.05, abs=1e-15)
    assert len(seen) == res.steps + 1


def test_blowup_detected_on_canonical_data(coarse):
    _, model, state, _ = coarse
    res = run_model(model, state, StepControl())
    assert res.reason.startswith("blow-up")
    assert res.state.t < 2.0


def test_step_collapse_raises(coarse):
    _, model, state, _ = coarse
    ctrl = StepControl(dt=1e-12, dt_min=1e-10)
    with pytest.raises(BlowupTerminated, match="step collapse"):
        step_model(model, state, ctrl)


def test_viscous_step_is_capped(coarse):
    g, _, state, _ = coarse
    visc = Model(g, BcSpec.exterior_robin(6.0), nu=1.0)
    h = min(g.hr, g.hz)
    assert visc.stable_dt(state, StepControl(), np.inf) <= h * h / 8
    with pytest.raises(ValueError):
        Model(g, BcSpec.exterior_robin(6.0), nu=-1.0)


def test_decay_zero_data_stays_zero():
    g = Grid.interior(17, 17)
    ut0, v0 = decay_initial_data(g, 0.0, 0.0)
    res = run_decay(DecayModel(g, 1.0), DecayState(0.0, ut0, v0, 1.0), StepControl(), 1.0)
    assert res.reason == "t_end reached"
    assert np.all(res.state.u_tilde == 0) and np.all(res.state.v == 0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.01), st.floats(-0.05, 0.05))
def test_decay_keeps_sign_and_bound(s, b):
    g = Grid.interior(17, 17)
    ut0, v0 = decay_initial_data(g, s, b)
    model = DecayModel(g, 1.0)
    state = DecayState(0.0, ut0, v0, 1.0)
    ctrl = StepControl()
    for _ in range(20):
        ctrl.dt = model.stable_dt(state, ctrl)
        state = step_decay(model, state, ctrl)
    assert np.all(state.u_tilde >= 0)
    # |v| < M/2 gives u_tilde <= u_tilde0 exp(-2 M t)
    assert np.all(state.u_tilde <= ut0 * np.exp(-2 * state.t) + 1e-15)


def test_decay_positivity_error():
    g = Grid.interior(17, 17)
    ut0, v0 = decay_initial_data(g, 1.0, 0.0)
    state = DecayState(0.0, ut0, v0 - 50.0 * (v0 == v0), 1.0)
    with pytest.raises(PositivityError):
        step_decay(DecayModel(g, 1.0), state, StepControl(dt=1.0, clip_tol=0.0))
