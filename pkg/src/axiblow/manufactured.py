"""Closed-form ``L5`` of symbolic fields, for manufactured-solution checks."""

from __future__ import annotations

import numpy as np
import sympy as sp

r, z = sp.symbols("r z", real=True)


def L5_expr(expr: sp.Expr) -> sp.Expr:
    return sp.diff(expr, r, 2) + 3 / r * sp.diff(expr, r) + sp.diff(expr, z, 2)


def _lambdify_regular(expr: sp.Expr):
    """Vectorised ``f(R, Z)`` that substitutes the ``r -> 0`` limit on the axis."""
    f = sp.lambdify((r, z), expr, "numpy")
    axis = sp.limit(expr, r, 0)
    f0 = sp.lambdify(z, axis, "numpy")

    def fn(R, Z):
        R = np.asarray(R, dtype=float)
        Z = np.asarray(Z, dtype=float)
        R, Z = np.broadcast_arrays(R, Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(f(R, Z), dtype=float) * np.ones(R.shape)
        on_axis = R == 0.0
        if np.any(on_axis):
            out[on_axis] = np.asarray(f0(Z[on_axis]), dtype=float) * np.ones(on_axis.sum())
        return out

    return fn


def manufactured(expr: sp.Expr | str):
    """Return ``(psi, omega)`` callables with ``omega = -L5 psi`` in closed form."""
    if isinstance(expr, str):
        expr = sp.sympify(expr, locals={"r": r, "z": z})
    omega = sp.simplify(-L5_expr(expr))
    return _lambdify_regular(expr), _lambdify_regular(omega)
