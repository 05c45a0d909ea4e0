"""Runtime monitors built on the weighted functionals of the blow-up argument.

Exterior runs use ``phi = exp(-alpha r^2) sin(pi z)`` and its image
``Phi = L5 phi = (4 alpha^2 r^2 - 8 alpha - pi^2) phi``, which is nonnegative on
``r >= 1`` once ``alpha >= 1 + sqrt(1 + pi^2/4)``.  The monitored quantities are

* ``Y = int log(u^2) Phi``   (the Lyapunov functional),
* ``P = int psi_z Phi``,
* ``L2u = int u^2`` and ``U2phi = int u^2 phi``,

all against ``r^3 dr dz``.  Along a smooth solution ``P' = pi^2 U2phi`` and
``Y' = 4 P``; Cauchy-Schwarz then gives ``Y'' >= 3 Y^2 / (2 c0)`` and, once the
initial data is admissible, ``(Y')^2 >= Y^3 / c0``.  Comparing with the
equality case bounds the blow-up time by ``T* = 2 sqrt(c0 / Y0)``.

``Y`` is summed over interior ``z``-nodes only: ``u`` vanishes on ``z = 0, 1``
and so does ``Phi``.  With the same positive quadrature weights in ``Y``, ``c0``
and ``U2phi`` the discrete Cauchy-Schwarz chain holds exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import specfun
from .grid import Grid, fd_weights

__all__ = [
    "Variant",
    "TestFunctionPair",
    "build_test_pair",
    "compute_c0",
    "Functionals",
    "functionals",
    "FunctionalSeries",
    "AdmissibilityReport",
    "check_admissibility",
    "RiccatiResiduals",
    "riccati_residuals",
    "time_derivative",
    "BlowupBounds",
    "blowup_bounds",
    "BlowupReport",
    "detect_blowup",
    "sobolev_surrogate",
    "resolution_indicator",
    "grad_surrogate",
    "measured_constant",
    "DecayReport",
    "decay_monitors",
]


class Variant(enum.Enum):
    EXTERIOR = "exterior"
    INTERIOR = "interior"


@dataclass(frozen=True)
class TestFunctionPair:
    """Weight ``phi`` and the weight used in ``Y`` and ``P``.

    On the exterior ``weight`` is ``Phi = L5 phi``; on the interior the growth
    functionals are weighted by ``phi`` itself and ``Phi`` is kept for reference.
    """

    variant: Variant
    alpha: float
    beta: float
    phi: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    grid: Grid = field(repr=False)
    theta1: np.ndarray | None = field(default=None, repr=False)
    c0: float | None = None
    c1: float | None = None

    @property
    def weight(self) -> np.ndarray:
        return self.Phi if self.variant is Variant.EXTERIOR else self.phi

    @property
    def constant(self) -> float:
        return self.c0 if self.variant is Variant.EXTERIOR else self.c1


def build_test_pair(grid: Grid, alpha: float | None = None, c1: float | None = None) -> TestFunctionPair:
    """Test functions for the grid's domain.

    Exterior: ``alpha`` defaults to ``beta/2`` with ``beta`` at its threshold and
    must satisfy ``alpha >= 1 + sqrt(1 + pi^2/4)``.

    Interior: ``0 < alpha < sqrt(lambda_1)``, ``beta`` follows from ``alpha``.
    ``c1`` defaults to ``3/(2 pi^2) int (L5 phi / phi)^2 phi``, the exterior
    construction repeated with the interior weight.
    """
    R, Z = grid.R, grid.Z
    if not grid.domain.is_interior:
        alpha = specfun.EXTERIOR_ALPHA_MIN if alpha is None else float(alpha)
        if alpha < specfun.EXTERIOR_ALPHA_MIN * (1 - 1e-14):
            raise ValueError(
                f"Phi positivity fails: alpha = {alpha} < 1 + sqrt(1 + pi^2/4) = {specfun.EXTERIOR_ALPHA_MIN:.6f}"
            )
        phi = np.exp(-alpha * R**2) * np.sin(np.pi * Z)
        q = 4 * alpha**2 * R**2 - (8 * alpha + np.pi**2)
        Phi = q * phi
        # at the threshold alpha the r = 1 row is zero up to rounding
        Phi = np.where(np.abs(Phi) < 1e-14 * np.abs(phi).max(), 0.0, Phi)
        cap = 4 * alpha**2 * math.exp(-alpha)
        if Phi.min() < 0 or Phi.max() > cap * (1 + 1e-12):
            raise ValueError("Phi positivity fails on the grid")
        pair = TestFunctionPair(Variant.EXTERIOR, alpha, 2 * alpha, phi, Phi, grid)
        return replace(pair, c0=compute_c0(pair))
    if alpha is None:
        raise ValueError("interior test functions need alpha")
    params = specfun.interior_params(alpha)
    lam1 = specfun.lambda1()
    theta1 = specfun.radial_eigenfunction(1, grid.r)
    phi = np.cosh(alpha * (Z - 1)) * theta1[:, None]
    Phi = (alpha**2 - lam1) * phi
    if np.any(phi[:-1] <= 0):
        raise ValueError("interior weight not positive on the open domain")
    if c1 is None:
        c1 = 3 / (2 * np.pi**2) * (alpha**2 - lam1) ** 2 * grid.integrate(phi)
    return TestFunctionPair(Variant.INTERIOR, params.alpha, params.beta, phi, Phi, grid, theta1, None, float(c1))


def compute_c0(pair: TestFunctionPair) -> float:
    """``3/(2 pi^2) int (Phi/phi)^2 phi r^3 dr dz`` by grid quadrature."""
    if pair.variant is not Variant.EXTERIOR:
        raise ValueError("c0 is defined for the exterior test function")
    g = pair.grid
    q = 4 * pair.alpha**2 * g.R**2 - (8 * pair.alpha + np.pi**2)
    return 3 / (2 * np.pi**2) * g.integrate(q**2 * pair.phi)


@dataclass(frozen=True)
class Functionals:
    Y: float
    P: float
    L2u: float
    U2phi: float
    sup_u: float


def _interior_z(grid: Grid, f: np.ndarray) -> float:
    return float(grid.weights_r @ f[:, 1:-1] @ grid.weights_z[1:-1])


def functionals(u: np.ndarray, psi: np.ndarray, pair: TestFunctionPair) -> Functionals:
    """``Y``, ``P``, ``L2u``, ``U2phi`` and ``max|u|`` of one snapshot."""
    g = pair.grid
    u2 = u * u
    inner = u2[:, 1:-1]
    if pair.variant is Variant.INTERIOR:
        # u may be nonzero on r = 1 but phi vanishes there
        inner = inner[:-1]
    if not np.all(inner > 0):
        raise ValueError("log domain: u^2 must be positive at interior z-nodes")
    w = pair.weight
    with np.errstate(divide="ignore"):
        logu2 = np.where(w != 0, np.log(np.where(u2 > 0, u2, 1.0)), 0.0)
    Y = _interior_z(g, logu2 * w)
    P = g.integrate(g.diff_z(psi) * w)
    return Functionals(Y, P, g.integrate(u2), g.integrate(u2 * pair.phi), float(np.max(np.abs(u))))


@dataclass
class FunctionalSeries:
    """Per-step record of a run; arrays grow by :meth:`append`."""

    times: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    Y: list = field(default_factory=list)
    P: list = field(default_factory=list)
    L2u: list = field(default_factory=list)
    U2phi: list = field(default_factory=list)
    sup_u: list = field(default_factory=list)
    H3_surrogate: list = field(default_factory=list)
    resolution: list = field(default_factory=list)

    def append(self, t: float, dt: float, f: Functionals, h3: float = float("nan"), resolution: float = float("nan")):
        if self.times and not t > self.times[-1]:
            raise ValueError("times must be strictly increasing")
        self.times.append(float(t))
        self.dt.append(float(dt))
        self.Y.append(f.Y)
        self.P.append(f.P)
        self.L2u.append(f.L2u)
        self.U2phi.append(f.U2phi)
        self.sup_u.append(f.sup_u)
        self.H3_surrogate.append(float(h3))
        self.resolution.append(float(resolution))

    def __len__(self):
        return len(self.times)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)


@dataclass(frozen=True)
class AdmissibilityReport:
    Y0: float
    P0: float
    c: float
    y_positive: bool
    p_positive: bool
    stated_margin: float  # P0^2 - (16/c) Y0^3
    operative_margin: float  # 16 P0^2 - Y0^3 / c
    stated: bool
    operative: bool
    marginal: bool

    @property
    def admissible(self) -> bool:
        return self.y_positive and self.p_positive and self.stated

    def as_dict(self) -> dict:
        return {
            "Y0": self.Y0,
            "P0": self.P0,
            "constant": self.c,
            "Y0_positive": self.y_positive,
            "P0_positive": self.p_positive,
            "stated_condition": self.stated,
            "stated_margin": self.stated_margin,
            "operative_condition": self.operative,
            "operative_margin": self.operative_margin,
            "marginal": self.marginal,
            "admissible": self.admissible,
        }


def check_admissibility(u0: np.ndarray, psi0: np.ndarray, pair: TestFunctionPair, rtol: float = 1e-9) -> AdmissibilityReport:
    """Sign and size conditions on the initial data.

    Two size conditions are reported: the stated one ``P0^2 >= (16/c) Y0^3`` and
    the weaker ``16 P0^2 >= Y0^3 / c`` that the growth argument actually uses.
    On the interior the single condition ``P0^2 >= Y0^3 / c1`` fills both slots.
    """
    if np.any(u0[:, 0] != 0) or np.any(u0[:, -1] != 0):
        raise ValueError("u0 must vanish on z = 0 and z = 1")
    f = functionals(u0, psi0, pair)
    c = pair.constant
    Y0, P0 = f.Y, f.P
    scale = max(abs(Y0), abs(P0), 1e-300)
    if pair.variant is Variant.EXTERIOR:
        stated = P0**2 - 16.0 / c * Y0**3
        operative = 16.0 * P0**2 - Y0**3 / c
    else:
        stated = operative = P0**2 - Y0**3 / c
    marginal = abs(Y0) <= rtol * scale or abs(P0) <= rtol * scale
    return AdmissibilityReport(
        Y0, P0, c, Y0 > 0, P0 > 0, stated, operative, stated >= 0, operative >= 0, marginal
    )


def time_derivative(t: np.ndarray, y: np.ndarray, width: int = 5) -> np.ndarray:
    """Derivative of samples on a nonuniform time grid.

    Centered ``width``-point finite differences in the bulk, shifted stencils of
    the same width at the ends.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(t)
    if n < 3:
        raise ValueError("need at least 3 samples")
    width = min(width, n)
    half = width // 2
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        w = fd_weights(t[i], t[lo:lo + width], 1)[1]
        out[i] = w @ y[lo:lo + width]
    return out


@dataclass(frozen=True)
class RiccatiResiduals:
    times: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    R4: np.ndarray
    dP: np.ndarray
    dY: np.ndarray
    d2Y: np.ndarray
    scale3: np.ndarray  # 3 Y^2 / (2 c0)
    scale4: np.ndarray  # Y^3 / c0


def riccati_residuals(series: FunctionalSeries, c0: float, width: int = 5) -> RiccatiResiduals:
    """Identity residuals ``R1 = P' - pi^2 U2phi``, ``R2 = Y' - 4P`` and
    inequality slacks ``R3 = Y'' - 3Y^2/(2 c0)``, ``R4 = (Y')^2 - Y^3/c0``."""
    t = series.array("times")
    Y = series.array("Y")
    P = series.array("P")
    dP = time_derivative(t, P, width)
    dY = time_derivative(t, Y, width)
    d2Y = time_derivative(t, dY, width)
    scale3 = 1.5 / c0 * Y**2
    scale4 = Y**3 / c0
    return RiccatiResiduals(
        t,
        dP - np.pi**2 * series.array("U2phi"),
        dY - 4.0 * P,
        d2Y - scale3,
        dY**2 - scale4,
        dP,
        dY,
        d2Y,
        scale3,
        scale4,
    )


@dataclass(frozen=True)
class BlowupBounds:
    Y0: float
    c0: float
    T_star: float
    alpha: float | None = None

    def lower_curve(self, t):
        """Equality-case lower bound ``4 c0 Y0 / (2 sqrt(c0) - t sqrt(Y0))^2``."""
        t = np.asarray(t, dtype=float)
        if np.any(t >= self.T_star) or np.any(t < 0):
            raise ValueError("past blow-up time")
        return 4 * self.c0 * self.Y0 / (2 * math.sqrt(self.c0) - t * math.sqrt(self.Y0)) ** 2

    def envelope_constant(self) -> float:
        if self.alpha is None:
            raise ValueError("envelope needs alpha")
        return 4 * self.alpha**2 * math.exp(-self.alpha)

    def l2_lower_curve(self, t):
        """Lower bound on ``int u^2 r^3`` implied by ``Y <= 4 alpha^2 e^-alpha int u^2``."""
        return self.lower_curve(t) / self.envelope_constant()


def blowup_bounds(Y0: float, P0: float, c0: float, alpha: float | None = None) -> BlowupBounds:
    """Blow-up time bound ``T* = 2 sqrt(c0/Y0)`` and the matching lower curve.

    ``P0`` only enters through the precondition ``P0 > 0``.
    """
    if not Y0 > 0:
        raise ValueError("Y0 must be positive")
    if not P0 > 0:
        raise ValueError("P0 must be positive")
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    return BlowupBounds(float(Y0), float(c0), 2 * math.sqrt(c0 / Y0), alpha)


@dataclass(frozen=True)
class BlowupReport:
    detected: bool
    reason: str
    T_detect: float | None
    T_star: float | None
    within_bound: bool | None

    def as_dict(self) -> dict:
        return {
            "detected": self.detected,
            "reason": self.reason,
            "T_detect": self.T_detect,
            "T_star": self.T_star,
            "T_detect_le_T_star": self.within_bound,
        }


def detect_blowup(series: FunctionalSeries, ctrl, T_star: float | None = None) -> BlowupReport:
    """First crossing of the sup-norm or H^3-surrogate threshold, or a step collapse."""
    if len(series) == 0:
        raise ValueError("empty history")
    t = series.array("times")
    sup_u = series.array("sup_u")
    h3 = series.array("H3_surrogate")
    dt = series.array("dt")
    hits = []
    if sup_u[0] > 0:
        idx = np.nonzero(sup_u > ctrl.blowup_factor * sup_u[0])[0]
        if idx.size:
            hits.append((t[idx[0]], "sup|u| threshold"))
    idx = np.nonzero(np.nan_to_num(h3, nan=-np.inf) > ctrl.h3_factor * h3[0])[0] if np.isfinite(h3[0]) else []
    if len(idx):
        hits.append((t[idx[0]], "H3 surrogate threshold"))
    idx = np.nonzero((dt[1:] > 0) & (dt[1:] < ctrl.dt_min))[0]
    if idx.size:
        hits.append((t[idx[0] + 1], "step collapse"))
    if not hits:
        return BlowupReport(False, "no blow-up", None, T_star, None)
    T, reason = min(hits)
    within = None if T_star is None else bool(T <= T_star)
    return BlowupReport(True, reason, float(T), T_star, within)


# --- Sobolev surrogates ------------------------------------------------------


def _mixed_derivatives(grid: Grid, f: np.ndarray, s: int):
    """All ``d_r^a d_z^b f`` with ``a + b <= s``."""
    ops = grid.sparse_ops
    Dr1, Dr2, Dz1T, Dz2T = ops["Dr1"], ops["Dr2"], ops["Dz1"].T.tocsr(), ops["Dz2"].T.tocsr()

    def dr(g, a):
        return {0: lambda: g, 1: lambda: Dr1 @ g, 2: lambda: Dr2 @ g, 3: lambda: Dr1 @ (Dr2 @ g)}[a]()

    def dz(g, b):
        # (g @ D^T) computed as (D @ g^T)^T to keep the sparse operand on the left
        if b == 0:
            return g
        if b == 1:
            return (Dz1T.T @ g.T).T
        if b == 2:
            return (Dz2T.T @ g.T).T
        return (Dz2T.T @ (Dz1T.T @ g.T)).T

    out = []
    for a in range(s + 1):
        fa = dr(f, a)
        for b in range(s + 1 - a):
            out.append(dz(fa, b))
    return out


def resolution_indicator(grid: Grid, u: np.ndarray) -> float:
    """``max |second difference of u^2| / max u^2`` over both directions.

    Roughly ``(h / l)^2`` for the smallest feature length ``l`` of ``u^2``; small
    values mean the grid resolves the field.
    """
    u2 = u * u
    top = float(u2.max())
    if top == 0.0:
        return 0.0
    return max(float(np.abs(np.diff(u2, 2, axis=0)).max()), float(np.abs(np.diff(u2, 2, axis=1)).max())) / top


def sobolev_surrogate(grid: Grid, f: np.ndarray, s: int) -> float:
    """Discrete ``H^s(r^3 dr dz)`` norm: all mixed finite differences up to order ``s``."""
    if not 0 <= s <= 3:
        raise ValueError("s must be in 0..3")
    if min(grid.Nr, grid.Nz) < 4 * (s + 1):
        raise ValueError(f"grid too coarse for s = {s}")
    f = grid._check(f)
    return math.sqrt(sum(grid.integrate(d * d) for d in _mixed_derivatives(grid, f, s)))


def grad_surrogate(grid: Grid, f: np.ndarray, s: int) -> float:
    """Discrete ``||grad f||_{H^(s-1)}``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return math.hypot(sobolev_surrogate(grid, grid.diff_r(f), s - 1), sobolev_surrogate(grid, grid.diff_z(f), s - 1))


def measured_constant(grid: Grid, s: int, probe: np.ndarray | None = None) -> float:
    """Grid-level stand-in for the Sobolev/Poincare constant ``C_s``.

    The largest of 1, the Poincare ratio ``|v|_s / |grad v|_(s-1)`` for the lowest
    Dirichlet mode, and the product ratio ``|fg|_s / (|f|_s |g|_s)`` on that mode
    and an optional probe field.
    """
    if not grid.domain.is_interior:
        raise ValueError("measured constant is defined on the interior domain")
    mode = specfun.radial_eigenfunction(1, grid.r)[:, None] * np.sin(np.pi * grid.z)[None, :]
    ratios = [1.0, sobolev_surrogate(grid, mode, s) / grad_surrogate(grid, mode, s)]
    for g in (mode, probe):
        if g is None or not np.any(g):
            continue
        ratios.append(
            sobolev_surrogate(grid, mode * g, s) / (sobolev_surrogate(grid, mode, s) * sobolev_surrogate(grid, g, s))
        )
    return float(max(ratios))


@dataclass(frozen=True)
class DecayReport:
    M: float
    C_hat: float
    max_abs_v: float
    v_guard_held: bool
    pointwise_bound_held: bool
    pointwise_worst_ratio: float
    grad_v_guard: float
    grad_v_max: float
    grad_v_first_violation: float | None
    grad_v_within_quarter: bool
    decay_exponent: float | None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def decay_monitors(
    times,
    u_tilde_history,
    v_history,
    grid: Grid,
    M: float,
    s: int = 3,
    tol: float = 1e-6,
    C_hat: float | None = None,
) -> DecayReport:
    """Bounds of the decay regime checked on stored snapshots.

    ``u_tilde_history`` and ``v_history`` are sequences of fields aligned with
    ``times``; the first entry is the initial state.
    """
    times = np.asarray(times, dtype=float)
    ut0 = u_tilde_history[0]
    if C_hat is None:
        C_hat = measured_constant(grid, s, ut0)
    max_v = 0.0
    guard_ok = True
    bound_ok = True
    worst = 0.0
    gv = []
    for t, ut, v in zip(times, u_tilde_history, v_history):
        max_v = max(max_v, float(np.max(np.abs(v))))
        guard_ok = guard_ok and max_v <= M / 2
        if guard_ok:
            cap = np.abs(ut0) * math.exp(-2 * M * t)
            excess = np.abs(ut) - cap * (1 + tol)
            mask = cap > 0
            if np.any(excess > 0):
                bound_ok = False
            if np.any(mask):
                worst = max(worst, float(np.max(np.abs(ut)[mask] / cap[mask])))
            elif np.any(ut != 0):
                bound_ok = False
        gv.append(grad_surrogate(grid, v, s))
    gv = np.asarray(gv)
    guard = M / (2 * C_hat**2)
    over = np.nonzero(gv > guard)[0]
    sup = np.array([float(np.max(np.abs(u))) for u in u_tilde_history])
    exponent = None
    if sup[0] > 0 and len(times) >= 3 and np.all(sup > 0):
        exponent = float(-np.polyfit(times, np.log(sup), 1)[0])
    return DecayReport(
        M,
        float(C_hat),
        max_v,
        guard_ok,
        bound_ok,
        worst,
        guard,
        float(gv.max()),
        None if over.size == 0 else float(times[over[0]]),
        bool(gv.max() <= M / (4 * C_hat**2)),
        exponent,
    )
