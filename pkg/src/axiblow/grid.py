"""Axisymmetric domains, tensor grids, r^3-weighted quadrature and finite differences.

Fields are plain ``(Nr, Nz)`` float64 arrays; a :class:`Grid` carries the nodes,
quadrature weights and differentiation matrices they are sampled on.

Interior grids (``0 <= r <= 1``) treat every field as even in ``r`` across the
axis: stencils that reach past ``r = 0`` use mirrored ghost values, and the
radial part of the five-dimensional Laplacian at ``r = 0`` is replaced by its
limit ``4 f_rr``.

Exterior grids truncate ``1 <= r < inf`` at ``r_max``.  The integrands used by
the diagnostics carry a factor ``exp(-alpha r^2)``, so the neglected tail is
bounded by ``exp(-alpha r_max^2)`` times a polynomial in ``r_max``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sps

__all__ = [
    "DomainKind",
    "Domain",
    "Grid",
    "fd_weights",
    "diff_matrix",
    "simpson_weights",
]


class DomainKind(enum.Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class Domain:
    gamma1: float
    gamma2: float
    kind: DomainKind
    z_lo: float = 0.0
    z_hi: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.gamma1 < self.gamma2):
            raise ValueError(f"need 0 <= gamma1 < gamma2, got {self.gamma1}, {self.gamma2}")
        if not self.z_lo < self.z_hi:
            raise ValueError("need z_lo < z_hi")
        if self.kind is DomainKind.INTERIOR and (self.gamma1 != 0.0 or self.gamma2 != 1.0):
            raise ValueError("interior domain is 0 <= r <= 1")
        if self.kind is DomainKind.EXTERIOR and (self.gamma1 != 1.0 or self.gamma2 <= 1.0):
            raise ValueError("exterior domain is 1 <= r <= r_max with r_max > 1")

    @classmethod
    def interior(cls) -> "Domain":
        return cls(0.0, 1.0, DomainKind.INTERIOR)

    @classmethod
    def exterior(cls, r_max: float = 8.0) -> "Domain":
        return cls(1.0, float(r_max), DomainKind.EXTERIOR)

    @property
    def is_interior(self) -> bool:
        return self.kind is DomainKind.INTERIOR


def fd_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Fornberg's finite-difference weights.

    Returns an array ``c`` of shape ``(m + 1, len(x))`` such that
    ``c[k] @ f(x)`` approximates the k-th derivative of ``f`` at ``x0``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def diff_matrix(nodes: np.ndarray, order: int, accuracy: int = 4, even_left: bool = False) -> np.ndarray:
    """Dense differentiation matrix of the given derivative order.

    Centered stencils in the bulk, one-sided stencils of the same accuracy at the
    ends.  With ``even_left`` the left end is a symmetry axis at ``nodes[0] = 0``
    and stencils wrap onto mirrored ghost nodes instead of going one-sided.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if accuracy not in (2, 4):
        raise ValueError("accuracy must be 2 or 4")
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    n_one = accuracy + order
    if n < max(n_one, 2 * order + 1):
        raise ValueError(f"grid too coarse: {n} nodes for derivative order {order}")
    half = accuracy // 2
    D = np.zeros((n, n))
    for i in range(n):
        lo, hi = i - half, i + half
        if hi > n - 1:
            idx = np.arange(n - n_one, n)
            pts = nodes[idx]
        elif lo < 0 and not even_left:
            idx = np.arange(0, n_one)
            pts = nodes[idx]
        else:
            idx = np.arange(lo, hi + 1)
            pts = np.where(idx < 0, -nodes[np.abs(idx)], nodes[np.abs(idx)])
            idx = np.abs(idx)
        w = fd_weights(nodes[i], pts, order)[order]
        np.add.at(D[i], idx, w)
    return D


def simpson_weights(nodes: np.ndarray) -> np.ndarray:
    """Composite Simpson weights on uniform nodes.

    An even node count closes with Simpson's 3/8 rule on the last three intervals,
    so the rule is exact for cubics either way.
    """
    n = len(nodes)
    if n < 4:
        raise ValueError("need at least 4 nodes")
    h = nodes[1] - nodes[0]
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3
    if m >= 3:
        w[:m:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m - 1] -= 1.0
        w[:m] *= h / 3.0
    if m != n:
        w[n - 4:] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


class Grid:
    """Uniform tensor grid on an axisymmetric domain.

    ``accuracy`` (2 or 4) selects the order of the finite-difference operators.
    """

    def __init__(self, domain: Domain, Nr: int, Nz: int, accuracy: int = 4):
        if Nr < 8 or Nz < 8:
            raise ValueError("Nr and Nz must be at least 8")
        self.domain = domain
        self.Nr = int(Nr)
        self.Nz = int(Nz)
        self.accuracy = accuracy
        self.r = np.linspace(domain.gamma1, domain.gamma2, self.Nr)
        self.z = np.linspace(domain.z_lo, domain.z_hi, self.Nz)
        self.hr = self.r[1] - self.r[0]
        self.hz = self.z[1] - self.z[0]

    @classmethod
    def interior(cls, Nr: int, Nz: int, accuracy: int = 4) -> "Grid":
        return cls(Domain.interior(), Nr, Nz, accuracy)

    @classmethod
    def exterior(cls, Nr: int, Nz: int, r_max: float = 8.0, accuracy: int = 4) -> "Grid":
        return cls(Domain.exterior(r_max), Nr, Nz, accuracy)

    def __repr__(self):
        return f"Grid({self.domain.kind.value}, r=[{self.r[0]}, {self.r[-1]}], Nr={self.Nr}, Nz={self.Nz})"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nr, self.Nz)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.z, indexing="ij")

    @property
    def R(self) -> np.ndarray:
        return self.mesh[0]

    @property
    def Z(self) -> np.ndarray:
        return self.mesh[1]

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def sample(self, fn) -> np.ndarray:
        """Evaluate ``fn(R, Z)`` on the nodes, broadcasting to the grid shape."""
        return np.broadcast_to(np.asarray(fn(self.R, self.Z), dtype=float), self.shape).copy()

    # quadrature

    @cached_property
    def weights_r(self) -> np.ndarray:
        return simpson_weights(self.r) * self.r**3

    @cached_property
    def weights_z(self) -> np.ndarray:
        return simpson_weights(self.z)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.outer(self.weights_r, self.weights_z)

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def integrate(self, f: np.ndarray) -> float:
        """Approximate the integral of ``f r^3 dr dz`` over the grid's domain."""
        f = self._check(f)
        return float(self.weights_r @ f @ self.weights_z)

    # differentiation

    @cached_property
    def Dr1(self) -> np.ndarray:
        return diff_matrix(self.r, 1, self.accuracy, even_left=self.domain.is_interior)

    @cached_property
    def Dr2(self) -> np.ndarray:
        return diff_matrix(self.r, 2, self.accuracy, even_left=self.domain.is_interior)

    @cached_property
    def Dz1(self) -> np.ndarray:
        return diff_matrix(self.z, 1, self.accuracy)

    @cached_property
    def Dz2(self) -> np.ndarray:
        return diff_matrix(self.z, 2, self.accuracy)

    @cached_property
    def sparse_ops(self) -> dict:
        """CSR copies of the banded differentiation matrices."""
        return {k: sps.csr_matrix(getattr(self, k)) for k in ("Dr1", "Dr2", "Dz1", "Dz2")}

    @cached_property
    def radial_L5(self) -> np.ndarray:
        """Matrix of ``f_rr + (3/r) f_r`` acting along ``r``."""
        r = self.r
        if self.domain.is_interior:
            inv_r = np.zeros_like(r)
            inv_r[1:] = 1.0 / r[1:]
            M = self.Dr2 + 3.0 * inv_r[:, None] * self.Dr1
            M[0] = 4.0 * self.Dr2[0]
        else:
            M = self.Dr2 + (3.0 / r)[:, None] * self.Dr1
        return M

    def diff_z(self, f: np.ndarray, order: int = 1) -> np.ndarray:
        f = self._check(f)
        D = self.Dz1 if order == 1 else self._order2(self.Dz2, order)
        return f @ D.T

    def diff_r(self, f: np.ndarray, order: int = 1) -> np.ndarray:
        f = self._check(f)
        D = self.Dr1 if order == 1 else self._order2(self.Dr2, order)
        return D @ f

    def apply_L5(self, f: np.ndarray) -> np.ndarray:
        """``f_rr + (3/r) f_r + f_zz`` at every node."""
        f = self._check(f)
        return self.radial_L5 @ f + f @ self.Dz2.T

    @staticmethod
    def _order2(D, order):
        if order != 2:
            raise ValueError("order must be 1 or 2")
        return D

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("non-finite field")
        return f
