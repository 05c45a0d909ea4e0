import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from axiblow import specfun

J11 = 3.8317059702075125


def test_lambda1_frozen():
    assert specfun.j1_zero(1) == pytest.approx(J11, rel=1e-14)
    assert specfun.lambda1() == pytest.approx(14.681970642123893, rel=1e-13)


def test_threshold_constants():
    assert specfun.EXTERIOR_ALPHA_MIN == pytest.approx(2.862096, abs=1e-6)
    assert specfun.EXTERIOR_BETA_MIN == pytest.approx(5.724192, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 60.0))
def test_k1_quadrature_matches_scipy(x):
    assert specfun.bessel_k1(x, scaled=True) == pytest.approx(special.k1e(x), rel=1e-10)
    assert specfun.bessel_k1_prime(x) == pytest.approx(special.kvp(1, x, 1), rel=1e-9)
    assert specfun.bessel_k1_second(x) == pytest.approx(special.kvp(1, x, 2), rel=1e-9)


def test_k1_domain():
    with pytest.raises(ValueError, match="domain"):
        specfun.bessel_k1(0.0)
    with pytest.raises(ValueError):
        specfun.bessel_k1(-1.0)


def test_collocation_matches_bessel_zeros():
    lam = specfun.radial_eigenvalues_collocation(4)
    exact = [specfun.j1_zero(k) ** 2 for k in range(1, 5)]
    np.testing.assert_allclose(lam, exact, rtol=1e-9)


def test_radial_eigenpairs():
    pairs = specfun.radial_eigenpairs(3)
    for p in pairs:
        assert p.theta[0] == 1.0
        assert abs(p.theta[-1]) < 1e-14
        assert p.residual <= p.tolerance
    with pytest.raises(ValueError):
        specfun.radial_eigenpairs(0)


def test_exterior_membership():
    assert specfun.in_S_exterior(6.0).member
    resonant = specfun.k1_ratio(2.0)
    rep = specfun.in_S_exterior(resonant)
    assert not rep.member and rep.nearest_k == 2


def test_interior_parameters():
    p = specfun.interior_params(1.0)
    assert p.beta == pytest.approx(specfun.lambda1() * math.tanh(1.0), rel=1e-14)
    assert p.beta == pytest.approx(11.181703038955654, rel=1e-12)
    with pytest.raises(ValueError, match="domain error"):
        specfun.interior_params(math.sqrt(specfun.lambda1()))
    assert not specfun.in_S_interior(specfun.lambda1()).member
    s = math.sqrt(specfun.lambda1())
    assert not specfun.in_S_interior(s / math.tanh(s)).member


@given(st.floats(0.2, 3.8))
def test_interior_beta_above_coth_bound(alpha):
    s = math.sqrt(specfun.lambda1())
    if alpha < s:
        assert specfun.interior_beta(alpha) > s / math.tanh(s)


def test_exterior_params():
    assert specfun.exterior_params(6.0).alpha == 3.0
    with pytest.raises(ValueError, match="threshold"):
        specfun.exterior_params(5.0)
