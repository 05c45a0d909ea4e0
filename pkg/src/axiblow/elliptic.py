"""Solvers for ``-(f_rr + (3/r) f_r + f_zz) psi = omega`` under four boundary regimes.

Every solver transforms in ``z`` (sine transform for Dirichlet ends, cosine
transform for Neumann ends, a precomputed eigenbasis for the Robin end) and then
solves one tridiagonal radial system per ``z``-mode.  The radial stencil is the
conservative second-order form ``(r^3 f_r)_r / r^3``; on the axis it reduces to
``8 (f_1 - f_0) / h^2``.

Exterior Neumann-Robin problems are split into a Dirichlet part ``psi1`` and a
harmonic correction ``psi2``.  ``psi2`` is assembled mode by mode from decaying
radial profiles whose amplitude is fixed by the Robin condition at ``r = 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.linalg
from scipy import special

from . import specfun
from .grid import Grid

__all__ = [
    "BcKind",
    "BcSpec",
    "ResonanceError",
    "EllipticSolver",
    "solver_for",
    "solve_dirichlet",
    "solve_interior_dirichlet_robin",
    "solve_exterior_neumann_robin",
    "solve_decay_shift",
    "boundary_residuals",
]


class ResonanceError(ValueError):
    pass


class BcKind(enum.Enum):
    DIRICHLET = "dirichlet"
    INTERIOR_DIRICHLET_ROBIN = "interior_dirichlet_robin"
    EXTERIOR_NEUMANN_ROBIN = "exterior_neumann_robin"
    DECAY_SHIFT = "decay_shift"


@dataclass(frozen=True)
class BcSpec:
    kind: BcKind
    beta: float | None = None
    M: float | None = None

    @classmethod
    def dirichlet(cls):
        return cls(BcKind.DIRICHLET)

    @classmethod
    def interior_robin(cls, beta: float):
        return cls(BcKind.INTERIOR_DIRICHLET_ROBIN, beta=float(beta))

    @classmethod
    def exterior_robin(cls, beta: float):
        return cls(BcKind.EXTERIOR_NEUMANN_ROBIN, beta=float(beta))

    @classmethod
    def decay_shift(cls, M: float):
        return cls(BcKind.DECAY_SHIFT, M=float(M))


def radial_stencil(r: np.ndarray, axis: bool) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper coefficients ``a_i, c_i`` of ``(r^3 f_r)_r / r^3``.

    Row ``i`` reads ``a_i f_{i-1} - (a_i + c_i) f_i + c_i f_{i+1}``.  Fluxes are
    divided by the exact cell measure ``(r_+^4 - r_-^4) / 4``, which keeps the
    stencil exact on ``r^2`` next to the axis.
    """
    h = r[1] - r[0]
    a = np.zeros_like(r)
    c = np.zeros_like(r)
    rm = r[1:] - h / 2
    rp = r[1:] + h / 2
    vol = (rp**4 - rm**4) / 4.0
    a[1:] = rm**3 / (vol * h)
    c[1:] = rp**3 / (vol * h)
    if axis:
        c[0] = 8.0 / h**2
    return a, c


class _ModalTridiag:
    """Tridiagonal solves of ``(T + mu_k I) x_k = b_k`` batched over modes ``k``.

    ``T`` has sub/main/super diagonals ``lower, diag, upper``.  Modes whose
    shifted matrix is not diagonally dominant go through a pivoted banded solve.
    """

    def __init__(self, lower, diag, upper, shifts):
        self.lower = np.asarray(lower, float)
        self.upper = np.asarray(upper, float)
        self.diag = np.asarray(diag, float)
        self.shifts = np.asarray(shifts, float)
        n = len(self.diag)
        d = self.diag[:, None] + self.shifts[None, :]
        off = np.abs(self.lower) + np.abs(self.upper)
        self.safe = np.all(np.abs(d) >= off[:, None] * (1 - 1e-12), axis=0) & np.all(d > 0, axis=0)
        dp = np.empty_like(d)
        cp = np.zeros_like(d)
        dp[0] = d[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(1, n):
                cp[i - 1] = self.upper[i - 1] / dp[i - 1]
                dp[i] = d[i] - self.lower[i] * cp[i - 1]
        self._dp = dp
        self._cp = cp
        self._banded = {}
        for k in np.flatnonzero(~self.safe):
            ab = np.zeros((3, n))
            ab[0, 1:] = self.upper[:-1]
            ab[1] = self.diag + self.shifts[k]
            ab[2, :-1] = self.lower[1:]
            self._banded[k] = ab

    def solve(self, b: np.ndarray) -> np.ndarray:
        n = len(self.diag)
        y = np.empty_like(b)
        dp, cp = self._dp, self._cp
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            y[0] = b[0] / dp[0]
            for i in range(1, n):
                y[i] = (b[i] - self.lower[i] * y[i - 1]) / dp[i]
            for i in range(n - 2, -1, -1):
                y[i] -= cp[i] * y[i + 1]
        for k, ab in self._banded.items():
            y[:, k] = scipy.linalg.solve_banded((1, 1), ab, b[:, k])
        return y


class EllipticSolver:
    """Fast-diagonalisation solver bound to one grid and one boundary regime.

    ``profile`` picks how the exterior harmonic correction is built:
    ``"discrete"`` (default) solves the discrete homogeneous radial problem with
    the decaying Bessel value imposed at ``r_max``, so ``psi2`` is discretely
    harmonic; ``"bessel"`` samples ``K(kappa r) / (r K(kappa))`` directly.
    """

    def __init__(self, grid: Grid, bc: BcSpec, profile: str = "discrete", tol_spec: float = specfun.TOL_SPEC):
        self.grid = grid
        self.bc = bc
        self.profile = profile
        self.tol_spec = tol_spec
        kind = bc.kind
        interior = grid.domain.is_interior
        if kind is BcKind.EXTERIOR_NEUMANN_ROBIN:
            if interior:
                raise ValueError("Neumann-Robin regime lives on the exterior domain")
        elif not interior:
            raise ValueError(f"{kind.value} regime lives on the interior domain")
        if kind is BcKind.INTERIOR_DIRICHLET_ROBIN:
            report = specfun.in_S_interior(bc.beta)
            if not report.member:
                raise ResonanceError(
                    f"resonant Robin coefficient: beta={bc.beta} within {report.nearest_gap:.3g} "
                    f"of {report.nearest_family}[{report.nearest_k}]"
                )

        r, z = grid.r, grid.z
        hz = grid.hz
        Nr, Nz = grid.shape
        a, c = radial_stencil(r, axis=interior)
        self._a, self._c = a, c
        # radial unknowns
        self.r_rows = slice(0, Nr - 1) if interior else slice(1, Nr - 1)
        rr = np.arange(Nr)[self.r_rows]
        lower = -a[rr]
        upper = -c[rr]
        diag = a[rr] + c[rr]

        # z transform
        self._ztype = {
            BcKind.DIRICHLET: "dst",
            BcKind.INTERIOR_DIRICHLET_ROBIN: "robin",
            BcKind.EXTERIOR_NEUMANN_ROBIN: "dct",
            BcKind.DECAY_SHIFT: "dct",
        }[kind]
        if self._ztype == "dst":
            self.z_rows = slice(1, Nz - 1)
            k = np.arange(1, Nz - 1)
            mu = (2.0 - 2.0 * np.cos(np.pi * k / (Nz - 1))) / hz**2
        elif self._ztype == "dct":
            self.z_rows = slice(0, Nz)
            k = np.arange(Nz)
            mu = (2.0 - 2.0 * np.cos(np.pi * k / (Nz - 1))) / hz**2
        else:
            self.z_rows = slice(1, Nz - 1)
            mu = self._robin_z_basis(bc.beta)
        self.mu = mu
        self._modal = _ModalTridiag(lower, diag, upper, mu)

        if kind is BcKind.EXTERIOR_NEUMANN_ROBIN:
            self._build_exterior_profiles()

    # z-direction machinery

    def _robin_z_basis(self, beta: float) -> np.ndarray:
        g = self.grid
        Nz, hz = g.Nz, g.hz
        d = g.Dz1[0]
        nd = int(np.max(np.flatnonzero(d))) + 1
        # psi_0 = sum_j e_j psi_j from  d . psi + beta psi_0 = 0
        e = -d[1:nd] / (d[0] + beta)
        self._robin_e = e
        m = Nz - 2
        B = (2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / hz**2
        B[0, : nd - 1] -= e / hz**2
        mu, V = np.linalg.eig(B)
        if np.max(np.abs(mu.imag)) > 1e-8 * np.max(np.abs(mu.real)):
            raise RuntimeError("Robin z-operator has complex spectrum")
        order = np.argsort(mu.real)
        mu = mu.real[order]
        V = V.real[:, order]
        self._V = V
        self._Vinv = np.linalg.inv(V)
        return mu

    def _z_forward(self, f: np.ndarray) -> np.ndarray:
        f = f[:, self.z_rows]
        if self._ztype == "dst":
            return scipy.fft.dst(f, type=1, axis=1)
        if self._ztype == "dct":
            return scipy.fft.dct(f, type=1, axis=1)
        return f @ self._Vinv.T

    def _z_inverse(self, fh: np.ndarray) -> np.ndarray:
        if self._ztype == "dst":
            return scipy.fft.idst(fh, type=1, axis=1)
        if self._ztype == "dct":
            return scipy.fft.idct(fh, type=1, axis=1)
        return fh @ self._V.T

    def _fill_z(self, inner: np.ndarray) -> np.ndarray:
        out = np.zeros((inner.shape[0], self.grid.Nz))
        out[:, self.z_rows] = inner
        if self._ztype == "robin":
            e = self._robin_e
            out[:, 0] = out[:, 1 : 1 + len(e)] @ e
        return out

    # exterior harmonic correction

    def _build_exterior_profiles(self):
        g = self.grid
        r = g.r
        r_max = r[-1]
        beta = self.bc.beta
        kappa = np.sqrt(self.mu)
        n_modes = len(kappa)
        tail = np.empty(n_modes)
        tail[0] = 1.0 / r_max**2
        for k in range(1, n_modes):
            tail[k] = _bessel_tail(float(kappa[k]), float(r_max))
        if self.profile == "discrete":
            b = np.zeros((g.Nr, n_modes))
            b[0] = 1.0
            b[-1] = tail
            rhs = np.zeros((g.Nr - 2, n_modes))
            rhs[0] += self._a[1] * b[0]
            rhs[-1] += self._c[g.Nr - 2] * b[-1]
            b[1:-1] = self._modal.solve(rhs)
        elif self.profile == "bessel":
            b = np.empty((g.Nr, n_modes))
            b[:, 0] = 1.0 / r**2
            with np.errstate(under="ignore"):
                for k in range(1, n_modes):
                    x = kappa[k]
                    b[:, k] = special.k1e(x * r) / special.k1e(x) * np.exp(-x * (r - 1.0)) / r
        else:
            raise ValueError(f"unknown profile {self.profile!r}")
        self.profiles = b
        self.kappa = kappa
        d = g.Dr1[0]
        self._dr0 = d
        denom = d @ b + beta * b[0]
        bad = np.flatnonzero(np.abs(denom) < self.tol_spec)
        if bad.size:
            raise ResonanceError(f"Robin resonance at mode k={int(bad[0])}")
        self.denominators = denom

    # public API

    def solve(self, omega: np.ndarray) -> np.ndarray:
        if self.bc.kind is BcKind.EXTERIOR_NEUMANN_ROBIN:
            psi1, psi2 = self.solve_parts(omega)
            return psi1 + psi2
        psi = self._solve_homogeneous(omega)
        if self.bc.kind is BcKind.DECAY_SHIFT:
            psi -= self.bc.M * self.grid.Z
        return psi

    def _solve_homogeneous(self, omega: np.ndarray) -> np.ndarray:
        g = self.grid
        omega = g._check(omega)
        rhs = self._z_forward(omega[self.r_rows])
        sol = self._modal.solve(rhs)
        psi = np.zeros(g.shape)
        psi[self.r_rows] = self._fill_z(self._z_inverse(sol))
        return psi

    def solve_parts(self, omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exterior only: ``(psi1, psi2)`` with ``psi1 = 0`` at ``r = 1`` and ``psi2`` harmonic."""
        if self.bc.kind is not BcKind.EXTERIOR_NEUMANN_ROBIN:
            raise ValueError("solve_parts applies to the exterior Neumann-Robin regime")
        psi1 = self._solve_homogeneous(omega)
        psi1_hat = scipy.fft.dct(psi1, type=1, axis=1)
        flux = self._dr0 @ psi1_hat
        coef = -flux / self.denominators
        psi2 = scipy.fft.idct(self.profiles * coef[None, :], type=1, axis=1)
        self.coefficients = coef
        return psi1, psi2

    def discrete_L5(self, psi: np.ndarray) -> np.ndarray:
        """The solver's own second-order operator, evaluated on its equation nodes (zero elsewhere)."""
        g = self.grid
        a, c = self._a, self._c
        out = np.zeros(g.shape)
        rad = np.zeros(g.shape)
        rad[1:-1] = a[1:-1, None] * psi[:-2] - (a[1:-1] + c[1:-1])[:, None] * psi[1:-1] + c[1:-1, None] * psi[2:]
        if g.domain.is_interior:
            rad[0] = c[0] * (psi[1] - psi[0])
        zz = np.zeros(g.shape)
        zz[:, 1:-1] = psi[:, :-2] - 2 * psi[:, 1:-1] + psi[:, 2:]
        if self._ztype == "dct":
            zz[:, 0] = 2 * (psi[:, 1] - psi[:, 0])
            zz[:, -1] = 2 * (psi[:, -2] - psi[:, -1])
        zz /= g.hz**2
        out[self.r_rows, self.z_rows] = (rad + zz)[self.r_rows, self.z_rows]
        return out

    def residual(self, psi: np.ndarray, omega: np.ndarray) -> float:
        """Max ``|L5 psi + omega|`` over the equation nodes."""
        if self.bc.kind is BcKind.DECAY_SHIFT:
            psi = psi + self.bc.M * self.grid.Z
        res = self.discrete_L5(psi) + omega
        return float(np.max(np.abs(res[self.r_rows, self.z_rows])))


def _bessel_tail(kappa: float, r_max: float) -> float:
    """``K(kappa r_max) / (r_max K(kappa))`` without overflow."""
    e = kappa * (r_max - 1.0)
    if e > 740.0:
        return 0.0
    ratio = specfun.bessel_k1(kappa * r_max, scaled=True) / specfun.bessel_k1(kappa, scaled=True)
    return ratio * math.exp(-e) / r_max


@lru_cache(maxsize=32)
def solver_for(grid: Grid, bc: BcSpec, profile: str = "discrete") -> EllipticSolver:
    return EllipticSolver(grid, bc, profile)


def solve_dirichlet(grid: Grid, omega: np.ndarray) -> np.ndarray:
    """Homogeneous Dirichlet data on ``r = 1``, ``z = 0`` and ``z = 1`` (interior domain)."""
    return solver_for(grid, BcSpec.dirichlet()).solve(omega)


def solve_interior_dirichlet_robin(grid: Grid, omega: np.ndarray, beta: float) -> np.ndarray:
    """``psi = 0`` on ``r = 1`` and ``z = 1``; ``psi_z + beta psi = 0`` on ``z = 0``."""
    return solver_for(grid, BcSpec.interior_robin(beta)).solve(omega)


def solve_exterior_neumann_robin(grid: Grid, omega: np.ndarray, beta: float) -> np.ndarray:
    """``psi_r + beta psi = 0`` on ``r = 1``; ``psi_z = 0`` on ``z = 0, 1``."""
    return solver_for(grid, BcSpec.exterior_robin(beta)).solve(omega)


def solve_decay_shift(grid: Grid, omega: np.ndarray, M: float) -> np.ndarray:
    """``psi = -M z`` on ``r = 1``; ``psi_z = -M`` on ``z = 0, 1`` (interior domain)."""
    return solver_for(grid, BcSpec.decay_shift(M)).solve(omega)


def boundary_residuals(grid: Grid, psi: np.ndarray, bc: BcSpec) -> dict[str, float]:
    """Max-norm residual of each boundary condition in ``bc``.

    Derivatives use the grid's one-sided boundary stencils.
    """
    psi = np.asarray(psi, dtype=float)
    kind = bc.kind
    dz0 = grid.Dz1[0] @ psi.T
    dz1 = grid.Dz1[-1] @ psi.T
    mx = lambda v: float(np.max(np.abs(v)))  # noqa: E731
    if kind is BcKind.DIRICHLET:
        return {"dirichlet_r1": mx(psi[-1]), "dirichlet_z0": mx(psi[:, 0]), "dirichlet_z1": mx(psi[:, -1])}
    if kind is BcKind.INTERIOR_DIRICHLET_ROBIN:
        return {
            "dirichlet_r1": mx(psi[-1]),
            "dirichlet_z1": mx(psi[:, -1]),
            "robin_z0": mx(dz0 + bc.beta * psi[:, 0]),
        }
    if kind is BcKind.EXTERIOR_NEUMANN_ROBIN:
        dr = grid.Dr1[0] @ psi
        return {"robin_r1": mx(dr + bc.beta * psi[0]), "neumann_z0": mx(dz0), "neumann_z1": mx(dz1)}
    M = bc.M
    return {
        "dirichlet_r1": mx(psi[-1] + M * grid.z),
        "neumann_z0": mx(dz0 + M),
        "neumann_z1": mx(dz1 + M),
    }
