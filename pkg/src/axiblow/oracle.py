"""ODE-level oracle for the Lyapunov functional, independent of the PDE code.

The equality case of the growth inequality is ``Y'' = 3 Y^2 / (2 c0)``.  It has
the first integral ``E = (Y')^2 - Y^3 / c0``; on ``E = 0`` with ``Y' > 0`` the
solution is ``Y(t) = 4 c0 Y0 / (2 sqrt(c0) - t sqrt(Y0))^2``, which blows up at
``T* = 2 sqrt(c0 / Y0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "OdeState",
    "ComparisonSeries",
    "integrate_comparison",
    "closed_form_lower",
    "closed_form_lower_derivative",
    "pole_time",
    "c0_closed_form",
]


@dataclass(frozen=True)
class OdeState:
    t: float
    Y: float
    Yp: float


@dataclass(frozen=True)
class ComparisonSeries:
    t: np.ndarray
    Y: np.ndarray
    Yp: np.ndarray
    c0: float
    blew_up: bool

    @property
    def energy(self) -> np.ndarray:
        return self.Yp**2 - self.Y**3 / self.c0

    def energy_drift(self) -> np.ndarray:
        """``|E(t) - E(0)|`` relative to ``max(1, Y^3/c0)``."""
        E = self.energy
        return np.abs(E - E[0]) / np.maximum(1.0, self.Y**3 / self.c0)

    def states(self):
        return [OdeState(float(t), float(y), float(p)) for t, y, p in zip(self.t, self.Y, self.Yp)]


def integrate_comparison(Y0: float, Yp0: float, c0: float, dt: float, t_end: float, Y_cap: float = 1e8) -> ComparisonSeries:
    """Fixed-step RK4 for ``Y'' = 3 Y^2 / (2 c0)``.

    Stops at ``t_end`` or as soon as ``Y`` exceeds ``Y_cap``; in the latter case
    the series ends with the first sample above the cap and ``blew_up`` is set.
    """
    if not (Y0 > 0 and Yp0 > 0 and c0 > 0 and dt > 0 and t_end > 0):
        raise ValueError("Y0, Yp0, c0, dt and t_end must be positive")
    k = 1.5 / c0

    def f(y, p):
        return p, k * y * y

    n = int(math.ceil(t_end / dt - 1e-9))
    ts, Ys, Ps = [0.0], [float(Y0)], [float(Yp0)]
    y, p = float(Y0), float(Yp0)
    blew_up = False
    for i in range(n):
        h = min(dt, t_end - i * dt)
        a1, b1 = f(y, p)
        a2, b2 = f(y + 0.5 * h * a1, p + 0.5 * h * b1)
        a3, b3 = f(y + 0.5 * h * a2, p + 0.5 * h * b2)
        a4, b4 = f(y + h * a3, p + h * b3)
        y += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        p += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        ts.append(i * dt + h)
        Ys.append(y)
        Ps.append(p)
        if not (math.isfinite(y) and y <= Y_cap):
            blew_up = True
            break
    return ComparisonSeries(np.array(ts), np.array(Ys), np.array(Ps), float(c0), blew_up)


def pole_time(Y0: float, c0: float) -> float:
    if not (Y0 > 0 and c0 > 0):
        raise ValueError("Y0 and c0 must be positive")
    return 2.0 * math.sqrt(c0 / Y0)


def closed_form_lower(Y0: float, c0: float, t):
    """``4 c0 Y0 / (2 sqrt(c0) - t sqrt(Y0))^2`` for ``0 <= t < T*``."""
    T = pole_time(Y0, c0)
    t = np.asarray(t, dtype=float)
    if np.any(t >= T):
        raise ValueError("past blow-up time")
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = 4 * c0 * Y0 / (2 * math.sqrt(c0) - t * math.sqrt(Y0)) ** 2
    return float(out) if out.ndim == 0 else out


def closed_form_lower_derivative(Y0: float, c0: float, t):
    """Time derivative of :func:`closed_form_lower`."""
    closed_form_lower(Y0, c0, t)  # domain check
    t = np.asarray(t, dtype=float)
    out = 8 * c0 * Y0 * math.sqrt(Y0) / (2 * math.sqrt(c0) - t * math.sqrt(Y0)) ** 3
    return float(out) if out.ndim == 0 else out


def _upper_gamma(m: int, x: float) -> float:
    """``Gamma(m, x)`` for integer ``m >= 1``."""
    if math.isinf(x):
        return 0.0
    return special.gamma(m) * special.gammaincc(m, x)


def _gauss_moment(m: int, alpha: float, r_max: float) -> float:
    """``int_1^r_max r^(2m+1) exp(-alpha r^2) dr``."""
    x_hi = alpha * r_max**2 if math.isfinite(r_max) else math.inf
    return (_upper_gamma(m + 1, alpha) - _upper_gamma(m + 1, x_hi)) / (2 * alpha ** (m + 1))


def c0_closed_form(alpha: float, r_max: float = math.inf) -> float:
    """``3/(2 pi^2) int_0^1 int_1^r_max (4 a^2 r^2 - 8 a - pi^2)^2 exp(-a r^2) sin(pi z) r^3``.

    Expands the square and integrates each power against the Gaussian with
    upper incomplete gamma functions.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    a4 = 16 * alpha**4
    a2 = -2 * 4 * alpha**2 * (8 * alpha + math.pi**2)
    a0 = (8 * alpha + math.pi**2) ** 2
    radial = a4 * _gauss_moment(3, alpha, r_max) + a2 * _gauss_moment(2, alpha, r_max) + a0 * _gauss_moment(1, alpha, r_max)
    return 3 / (2 * math.pi**2) * (2 / math.pi) * radial
