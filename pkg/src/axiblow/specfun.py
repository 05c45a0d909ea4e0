"""Special functions and spectral data for the radial problems.

* ``K(x) = int_0^inf exp(-x cosh t) cosh t dt`` (the order-one modified Bessel
  function of the second kind) and its first two derivatives, by quadrature of
  that integral and of its x-derivatives.
* The radial Dirichlet eigenproblem ``-(f'' + 3 f'/r) = lam f`` on ``[0, 1)`` with
  ``f(1) = 0``, solved by Chebyshev collocation and, independently, through the
  zeros of ``J_1``.
* Resonance tests for the Robin coefficient on the exterior and interior domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .grid import diff_matrix

__all__ = [
    "EigensolverInconsistency",
    "RadialEigenpair",
    "RobinSpectrumParams",
    "ExteriorMembership",
    "InteriorMembership",
    "bessel_k1",
    "bessel_k1_prime",
    "bessel_k1_second",
    "k1_ratio",
    "j1_zero",
    "radial_eigenvalues_collocation",
    "radial_eigenpairs",
    "in_S_exterior",
    "in_S_interior",
    "interior_params",
    "exterior_params",
    "EXTERIOR_ALPHA_MIN",
    "EXTERIOR_BETA_MIN",
    "TOL_SPEC",
]

TOL_SPEC = 1e-6
EXTERIOR_ALPHA_MIN = 1.0 + math.sqrt(1.0 + math.pi**2 / 4.0)
EXTERIOR_BETA_MIN = 2.0 * EXTERIOR_ALPHA_MIN


class EigensolverInconsistency(RuntimeError):
    pass


# --- K_1 by quadrature -------------------------------------------------------


def _theta_max(x: float, power: int) -> float:
    # exp(-x (c - 1)) c^power < exp(-45) for c = cosh(theta) beyond this point
    c = 1.0 + 45.0 / x
    for _ in range(50):
        c_new = 1.0 + (45.0 + power * math.log(c)) / x
        if abs(c_new - c) <= 1e-12 * c:
            break
        c = c_new
    return math.acosh(c_new)


@lru_cache(maxsize=4096)
def _k_moment_scaled(x: float, power: int) -> float:
    """``exp(x) * int_0^inf exp(-x cosh t) cosh(t)**power dt``."""
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"domain error: x must be positive and finite, got {x}")
    tmax = _theta_max(x, power)

    def f(t):
        c = math.cosh(t)
        return math.exp(-x * (c - 1.0)) * c**power

    # the bulk of the mass sits within ~1/sqrt(x) of t = 0
    w = min(tmax, 4.0 / math.sqrt(x))
    a, _ = integrate.quad(f, 0.0, w, epsabs=0.0, epsrel=1e-13, limit=200)
    b = 0.0
    if tmax > w:
        b, _ = integrate.quad(f, w, tmax, epsabs=0.0, epsrel=1e-13, limit=200)
    return a + b


def _scale(x: float, scaled: bool) -> float:
    return 1.0 if scaled else math.exp(-x)


def bessel_k1(x: float, scaled: bool = False) -> float:
    """``K(x) = int_0^inf exp(-x cosh t) cosh t dt``; ``scaled`` returns ``exp(x) K(x)``."""
    x = float(x)
    return _k_moment_scaled(x, 1) * _scale(x, scaled)


def bessel_k1_prime(x: float, scaled: bool = False) -> float:
    """``K'(x) = -int_0^inf exp(-x cosh t) cosh^2 t dt``."""
    x = float(x)
    return -_k_moment_scaled(x, 2) * _scale(x, scaled)


def bessel_k1_second(x: float, scaled: bool = False) -> float:
    """``K''(x) = int_0^inf exp(-x cosh t) cosh^3 t dt``."""
    x = float(x)
    return _k_moment_scaled(x, 3) * _scale(x, scaled)


def k1_ratio(x: float) -> float:
    """``-x K'(x) / K(x)``, the excluded Robin coefficient for wavenumber ``x``."""
    x = float(x)
    return x * _k_moment_scaled(x, 2) / _k_moment_scaled(x, 1)


# --- radial Dirichlet eigenproblem -------------------------------------------


def _cheb(n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def radial_eigenvalues_collocation(count: int, n_cheb: int | None = None) -> np.ndarray:
    """First ``count`` eigenvalues of ``-(f'' + 3 f'/r)`` with ``f(1) = 0``.

    Chebyshev collocation on ``[-1, 1]`` with an odd number of intervals, so no
    node sits on the axis; the even symmetry folds the mirrored columns back.
    """
    n = n_cheb or 4 * count + 61
    if n % 2 == 0:
        n += 1
    D, x = _cheb(n)
    L = D @ D + np.diag(3.0 / x) @ D
    pos = np.arange(1, (n + 1) // 2)
    A = L[np.ix_(pos, pos)] + L[np.ix_(pos, n - pos)]
    lam = np.linalg.eigvals(-A)
    if np.max(np.abs(lam.imag)) > 1e-8 * np.max(np.abs(lam.real)):
        raise EigensolverInconsistency("complex eigenvalues in collocation matrix")
    lam = np.sort(lam.real)
    return lam[:count]


def j1_zero(k: int) -> float:
    """k-th positive zero of ``J_1`` by bisection inside a McMahon bracket."""
    b = (k + 0.25) * math.pi
    guess = b - 3.0 / (8.0 * b)
    return optimize.bisect(special.j1, guess - 0.5, guess + 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass(frozen=True)
class RadialEigenpair:
    k: int
    lambda_k: float
    r: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    residual: float = 0.0
    tolerance: float = 0.0

    def __call__(self, r):
        return radial_eigenfunction(self.k, r)


def radial_eigenfunction(k: int, r) -> np.ndarray:
    """``theta_k(r) = J_1(j r) / r`` scaled so that ``theta_k(0) = 1``."""
    j = j1_zero(k)
    r = np.asarray(r, dtype=float)
    out = np.ones_like(r)
    nz = r != 0.0
    out[nz] = 2.0 * special.j1(j * r[nz]) / (j * r[nz])
    return out


def radial_eigenpairs(count: int, Nr: int = 129, tol: float = 1e-8) -> list[RadialEigenpair]:
    """Eigenpairs of the radial problem, cross-checked two ways.

    The eigenvalues from the collocation matrix must match ``j_{1,k}^2`` within
    ``tol * max(1, lambda_k)``.  Each returned profile is sampled on
    ``linspace(0, 1, Nr)`` with ``max |theta_k| = theta_k(0) = 1``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if Nr < 64:
        raise ValueError("Nr must be >= 64")
    lam_matrix = radial_eigenvalues_collocation(count)
    r = np.linspace(0.0, 1.0, Nr)
    h = r[1] - r[0]
    D1 = diff_matrix(r, 1, 4, even_left=True)
    D2 = diff_matrix(r, 2, 4, even_left=True)
    inv_r = np.zeros_like(r)
    inv_r[1:] = 1.0 / r[1:]
    L = D2 + 3.0 * inv_r[:, None] * D1
    L[0] = 4.0 * D2[0]
    pairs = []
    for k in range(1, count + 1):
        lam = j1_zero(k) ** 2
        if abs(lam - lam_matrix[k - 1]) > tol * max(1.0, lam):
            raise EigensolverInconsistency(
                f"eigensolver inconsistency at k={k}: {lam_matrix[k - 1]} vs {lam}"
            )
        theta = radial_eigenfunction(k, r)
        res = float(np.max(np.abs((L @ theta)[:-1] + lam * theta[:-1])))
        tolerance = max(1e-9, lam**3 * h**4)
        if res > tolerance:
            raise EigensolverInconsistency(f"discrete residual {res} exceeds {tolerance} at k={k}")
        pairs.append(RadialEigenpair(k, lam, r, theta, res, tolerance))
    return pairs


@lru_cache(maxsize=8)
def _lambdas(k_max: int) -> np.ndarray:
    return np.array([j1_zero(k) ** 2 for k in range(1, k_max + 1)])


def lambda1() -> float:
    return float(_lambdas(1)[0])


# --- Robin-coefficient sets --------------------------------------------------


@dataclass(frozen=True)
class RobinSpectrumParams:
    beta: float
    alpha: float


@dataclass
class ExteriorMembership:
    """Resonance report for the exterior Neumann-Robin problem.

    ``member`` is the literal set test: ``beta`` differs from ``-k K'(k)/K(k)``
    for integer ``k``.  The solvability test on the coefficient denominator
    ``(beta - 1) K(kappa) + kappa K'(kappa)`` is reported separately, normalised
    by ``K(kappa)`` so it reads ``beta - 1 - ratio(kappa)``, for ``kappa = k pi``
    (unit-height slab) and for ``kappa = k``.
    """

    beta: float
    k_max: int
    member: bool
    nearest_k: int
    nearest_gap: float
    denominator_ok: bool
    denominator_min: float
    denominator_k: int
    denominator_ok_integer: bool
    denominator_min_integer: float
    tol: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def in_S_exterior(beta: float, k_max: int = 64, tol: float = TOL_SPEC) -> ExteriorMembership:
    if beta <= 0:
        raise ValueError("beta must be positive")
    ks = np.arange(1, k_max + 1)
    ratios = np.array([k1_ratio(k) for k in ks])
    gaps = np.abs(beta - ratios)
    i = int(np.argmin(gaps))
    den_pi = np.array([beta - 1.0 - k1_ratio(k * math.pi) for k in ks])
    j = int(np.argmin(np.abs(den_pi)))
    den_int = beta - 1.0 - ratios
    return ExteriorMembership(
        beta=float(beta),
        k_max=int(k_max),
        member=bool(np.all(gaps > tol)),
        nearest_k=int(ks[i]),
        nearest_gap=float(gaps[i]),
        denominator_ok=bool(np.all(np.abs(den_pi) > tol)),
        denominator_min=float(abs(den_pi[j])),
        denominator_k=int(ks[j]),
        denominator_ok_integer=bool(np.all(np.abs(den_int) > tol)),
        denominator_min_integer=float(np.min(np.abs(den_int))),
        tol=tol,
    )


@dataclass
class InteriorMembership:
    beta: float
    k_max: int
    member: bool
    nearest_family: str
    nearest_k: int
    nearest_gap: float
    tol: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def interior_excluded(k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """The two excluded families: ``lambda_k`` and ``sqrt(lambda_k) coth(sqrt(lambda_k))``."""
    lam = _lambdas(k_max)
    s = np.sqrt(lam)
    return lam, s / np.tanh(s)


def in_S_interior(beta: float, k_max: int = 64, tol: float = TOL_SPEC) -> InteriorMembership:
    if beta <= 0:
        raise ValueError("beta must be positive")
    lam, coth_fam = interior_excluded(k_max)
    g1 = np.abs(beta - lam)
    g2 = np.abs(beta - coth_fam)
    if g1.min() <= g2.min():
        fam, k, gap = "lambda_k", int(np.argmin(g1)) + 1, float(g1.min())
    else:
        fam, k, gap = "sqrt_lambda_coth", int(np.argmin(g2)) + 1, float(g2.min())
    return InteriorMembership(float(beta), int(k_max), gap > tol, fam, k, gap, tol)


def interior_beta(alpha: float) -> float:
    lam = lambda1()
    return lam / alpha * math.tanh(alpha)


def interior_params(alpha: float) -> RobinSpectrumParams:
    """Robin coefficient paired with the interior test-function exponent ``alpha``."""
    lam = lambda1()
    s = math.sqrt(lam)
    if not 0.0 < alpha < s:
        raise ValueError(f"domain error: alpha must lie in (0, sqrt(lambda_1) = {s:.8f}), got {alpha}")
    beta = interior_beta(alpha)
    bound = s / math.tanh(s)
    if not beta > bound:
        raise ValueError(f"parameter relation violated: beta = {beta:.8f} <= {bound:.8f}")
    return RobinSpectrumParams(beta=beta, alpha=float(alpha))


def exterior_params(beta: float) -> RobinSpectrumParams:
    """``alpha = beta / 2`` with the positivity threshold on ``beta`` enforced."""
    if beta < EXTERIOR_BETA_MIN:
        raise ValueError(f"beta below threshold 2+2*sqrt(1+pi^2/4) = {EXTERIOR_BETA_MIN:.5f}")
    return RobinSpectrumParams(beta=float(beta), alpha=beta / 2.0)
