"""Identity residuals of the canonical exterior run under simultaneous (h, dt) halving.

Residuals are measured on the interval where the base run stays resolved, the
same window used for both resolutions.
"""

import argparse

import numpy as np

from axiblow.diagnostics import (
    FunctionalSeries,
    build_test_pair,
    functionals,
    resolution_indicator,
    riccati_residuals,
)
from axiblow.dynamics import Model, StepControl, canonical_exterior_data, run_model
from axiblow.elliptic import BcSpec
from axiblow.grid import Grid


def run(Nr, Nz, cfl, args, t_end=np.inf):
    g = Grid.exterior(Nr, Nz, r_max=args.r_max)
    pair = build_test_pair(g, args.alpha)
    u0, w0, _ = canonical_exterior_data(g, args.alpha, args.b, args.s, args.c)
    model = Model(g, BcSpec.exterior_robin(2 * args.alpha))
    series = FunctionalSeries()

    def obs(st, dt):
        series.append(st.t, dt, functionals(st.u, st.psi, pair), resolution=resolution_indicator(g, st.u))

    res = run_model(model, model.state(0.0, u0, w0), StepControl(cfl_c=cfl), t_end, obs)
    return series, riccati_residuals(series, pair.c0), res.reason


def scaled(series, res, t_max):
    t = series.array("times")
    m = t <= t_max
    scale = np.maximum(1.0, np.abs(series.array("P")[m]))
    return [float(np.max(np.abs(R[m]) / scale)) for R in (res.R1, res.R2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=3.0)
    ap.add_argument("--r-max", type=float, default=4.0)
    ap.add_argument("--s", type=float, default=2.0)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=6.0)
    ap.add_argument("--rho", type=float, default=0.05, help="resolution indicator limit")
    ap.add_argument("--levels", type=int, default=2, help="number of grids, starting at 257x129")
    args = ap.parse_args()

    series, res, reason = run(257, 129, 0.1, args)
    rho = series.array("resolution")
    t = series.array("times")
    bad = np.flatnonzero(rho > args.rho)
    t_res = t[bad[0] - 1] if bad.size else t[-1]
    print(f"base run: {reason} at t = {t[-1]:.4f}; resolved until t = {t_res:.4f}")
    rows = [(257, 129, 0.1, *scaled(series, res, t_res))]
    for k in range(1, args.levels):
        Nr, Nz, cfl = 256 * 2**k + 1, 128 * 2**k + 1, 0.1 / 2**k
        s, r, _ = run(Nr, Nz, cfl, args, t_end=t_res)
        rows.append((Nr, Nz, cfl, *scaled(s, r, t_res)))
    print(f"{'Nr':>5} {'Nz':>5} {'cfl':>7} {'R1':>10} {'R2':>10}")
    for Nr, Nz, cfl, r1, r2 in rows:
        print(f"{Nr:5d} {Nz:5d} {cfl:7.4f} {r1:10.3e} {r2:10.3e}")
    for a, b in zip(rows, rows[1:]):
        print(f"drop {a[0]}->{b[0]}: R1 x{a[3] / b[3]:.2f}, R2 x{a[4] / b[4]:.2f}")


if __name__ == "__main__":
    main()
