import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axiblow import oracle, specfun
from axiblow.diagnostics import (
    Functionals,
    FunctionalSeries,
    Variant,
    blowup_bounds,
    build_test_pair,
    check_admissibility,
    decay_monitors,
    detect_blowup,
    functionals,
    grad_surrogate,
    measured_constant,
    resolution_indicator,
    riccati_residuals,
    sobolev_surrogate,
    time_derivative,
)
from axiblow.dynamics import StepControl, canonical_exterior_data
from axiblow.grid import Grid

EXT = Grid.exterior(129, 33, r_max=4.0)
INT = Grid.interior(33, 33)


def test_exterior_pair_threshold_and_cap():
    pair = build_test_pair(EXT)
    assert pair.alpha == pytest.approx(specfun.EXTERIOR_ALPHA_MIN)
    assert pair.Phi.min() >= 0
    with pytest.raises(ValueError, match="Phi positivity fails"):
        build_test_pair(EXT, 2.5)
    pair = build_test_pair(EXT, 3.0)
    assert pair.variant is Variant.EXTERIOR and pair.beta == 6.0
    assert pair.Phi.max() <= 36 * math.exp(-3.0)


def test_c0_matches_incomplete_gamma():
    g = Grid.exterior(513, 129, r_max=4.0)
    c0 = build_test_pair(g, 3.0).c0
    assert c0 == pytest.approx(oracle.c0_closed_form(3.0, 4.0), rel=1e-7)


def test_interior_pair():
    pair = build_test_pair(INT, 1.0)
    assert pair.variant is Variant.INTERIOR
    assert pair.beta == pytest.approx(specfun.interior_beta(1.0))
    assert pair.c1 > 0 and pair.constant == pair.c1
    assert build_test_pair(INT, 1.0, c1=2.5).c1 == 2.5
    with pytest.raises(ValueError):
        build_test_pair(INT)


def test_functionals_log_domain():
    pair = build_test_pair(EXT, 3.0)
    with pytest.raises(ValueError, match="log domain"):
        functionals(EXT.zeros(), EXT.zeros(), pair)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(-3.0, 3.0), st.floats(-10.0, 10.0))
def test_envelope_holds_discretely(s, c, b):
    # log(x) < x and 0 <= Phi <= 4 alpha^2 e^-alpha give Y < cap * int u^2 for any data
    pair = build_test_pair(EXT, 3.0)
    u0, _, psi0 = canonical_exterior_data(EXT, 3.0, b, s, c)
    f = functionals(u0, psi0, pair)
    assert f.Y < 4 * 9 * math.exp(-3.0) * f.L2u


def test_admissibility_margins():
    pair = build_test_pair(EXT, 3.0)
    u0, _, psi0 = canonical_exterior_data(EXT, 3.0, 6.0, 2.0, 1.0)
    rep = check_admissibility(u0, psi0, pair)
    c = pair.c0
    assert rep.stated_margin == pytest.approx(rep.P0**2 - 16 / c * rep.Y0**3)
    assert rep.operative_margin == pytest.approx(16 * rep.P0**2 - rep.Y0**3 / c)
    assert rep.admissible and rep.as_dict()["admissible"]
    weak = check_admissibility(*canonical_exterior_data(EXT, 3.0, 0.01, 2.0, 1.0)[::2], pair)
    assert not weak.stated
    bad = u0.copy()
    bad[:, 0] = 1.0
    with pytest.raises(ValueError, match="vanish"):
        check_admissibility(bad, psi0, pair)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=5, max_size=5), st.integers(0, 2**31))
def test_time_derivative_exact_for_quartics(coef, seed):
    t = np.sort(np.random.default_rng(seed).uniform(0, 1, 12))
    if np.min(np.diff(t)) < 1e-3:
        return
    p = np.polynomial.Polynomial(coef)
    np.testing.assert_allclose(time_derivative(t, p(t)), p.deriv()(t), atol=1e-6)


def _series_from(t, Y, P, U2phi):
    s = FunctionalSeries()
    for i, ti in enumerate(t):
        s.append(ti, 0.0 if i == 0 else ti - t[i - 1], Functionals(Y[i], P[i], 1.0, U2phi[i], 1.0))
    return s


def test_riccati_residuals_vanish_on_closed_form():
    Y0, c0 = 1.0, 0.8
    t = np.linspace(0, 0.5 * oracle.pole_time(Y0, c0), 400)
    Y = oracle.closed_form_lower(Y0, c0, t)
    dY = oracle.closed_form_lower_derivative(Y0, c0, t)
    P = dY / 4
    # P' = Y''/4 = 3 Y^2 / (8 c0), matched through U2phi
    U2phi = 3 * Y**2 / (8 * c0) / np.pi**2
    res = riccati_residuals(_series_from(t, Y, P, U2phi), c0)
    inner = slice(5, -5)
    assert np.max(np.abs(res.R1[inner])) < 1e-6
    assert np.max(np.abs(res.R2[inner] / dY[inner])) < 1e-8
    assert np.max(np.abs(res.R3[inner] / res.scale3[inner])) < 1e-6
    assert np.max(np.abs(res.R4 / res.scale4)) < 1e-6


def test_series_requires_increasing_time():
    s = FunctionalSeries()
    f = Functionals(1, 1, 1, 1, 1)
    s.append(0.0, 0.0, f)
    with pytest.raises(ValueError):
        s.append(0.0, 0.0, f)


def test_blowup_bounds():
    b = blowup_bounds(2.0, 1.0, 0.5, alpha=3.0)
    assert b.T_star == pytest.approx(1.0)
    assert b.lower_curve(0.0) == pytest.approx(2.0)
    assert b.l2_lower_curve(0.5) == pytest.approx(b.lower_curve(0.5) / (36 * math.exp(-3)))
    with pytest.raises(ValueError, match="past blow-up time"):
        b.lower_curve(1.0)
    for args in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)]:
        with pytest.raises(ValueError):
            blowup_bounds(*args)


def test_detect_blowup():
    s = FunctionalSeries()
    for i, (t, sup) in enumerate([(0.0, 1.0), (0.1, 10.0), (0.2, 2e6)]):
        s.append(t, 0.0 if i == 0 else 0.1, Functionals(1, 1, 1, 1, sup))
    rep = detect_blowup(s, StepControl(), T_star=1.0)
    assert rep.detected and rep.T_detect == 0.2 and rep.within_bound
    assert rep.reason == "sup|u| threshold"
    quiet = detect_blowup(s, StepControl(blowup_factor=1e9))
    assert not quiet.detected


def test_sobolev_surrogates():
    g = Grid.interior(65, 65)
    one = np.ones(g.shape)
    assert sobolev_surrogate(g, one, 0) == pytest.approx(0.5)
    assert sobolev_surrogate(g, one, 3) == pytest.approx(0.5, abs=1e-10)
    mode = np.sin(np.pi * g.Z)
    # |f|^2 + |f_z|^2 with int r^3 = 1/4 and int sin^2 = int cos^2 = 1/2
    assert sobolev_surrogate(g, mode, 1) == pytest.approx(math.sqrt((1 + math.pi**2) / 8), rel=1e-5)
    vals = [sobolev_surrogate(g, mode, s) for s in range(4)]
    assert vals == sorted(vals)
    assert grad_surrogate(g, mode, 1) == pytest.approx(math.pi / math.sqrt(8), rel=1e-5)
    with pytest.raises(ValueError, match="too coarse"):
        sobolev_surrogate(Grid.interior(9, 9), np.ones((9, 9)), 3)
    assert measured_constant(g, 3) >= 1.0


def test_resolution_indicator_tracks_sharpness():
    g = Grid.interior(65, 65)
    smooth = np.sin(np.pi * g.Z)
    sharp = np.exp(-200 * (g.Z - 0.5) ** 2)
    assert resolution_indicator(g, smooth) < resolution_indicator(g, sharp)


def test_decay_monitors_detect_violation():
    g = Grid.interior(17, 17)
    ut0 = np.sin(np.pi * g.Z) ** 2
    ut0[:, [0, -1]] = 0
    times = [0.0, 0.1, 0.2]
    zero = [g.zeros()] * 3
    good = decay_monitors(times, [ut0 * math.exp(-4 * t) for t in times], zero, g, 1.0, 1)
    assert good.pointwise_bound_held and good.v_guard_held
    assert good.decay_exponent == pytest.approx(4.0)
    growing = decay_monitors(times, [ut0, ut0, ut0], zero, g, 1.0, 1)
    assert not growing.pointwise_bound_held and growing.pointwise_worst_ratio > 1
    # the pointwise bound is only asserted while the guard on v holds
    unguarded = decay_monitors(times, [ut0, ut0, ut0], [g.zeros(), np.ones(g.shape), g.zeros()], g, 1.0, 1)
    assert not unguarded.v_guard_held and unguarded.max_abs_v == 1.0
