"""Scan the canonical exterior data family for admissible (s, c, b)."""

import argparse
import itertools

from axiblow.diagnostics import blowup_bounds, build_test_pair, check_admissibility
from axiblow.dynamics import Model, canonical_exterior_data
from axiblow.elliptic import BcSpec
from axiblow.grid import Grid


def floats(text):
    return [float(x) for x in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=3.0)
    ap.add_argument("--r-max", type=float, default=4.0)
    ap.add_argument("--grid", default="129,65")
    ap.add_argument("--s", default="0.5,2,8")
    ap.add_argument("--c", default="0,1,4")
    ap.add_argument("--b", default="0.5,2,6")
    args = ap.parse_args()
    Nr, Nz = (int(x) for x in args.grid.split(","))
    g = Grid.exterior(Nr, Nz, r_max=args.r_max)
    pair = build_test_pair(g, args.alpha)
    model = Model(g, BcSpec.exterior_robin(2 * args.alpha))
    print(f"c0 = {pair.c0:.8f}")
    print(f"{'s':>6} {'c':>6} {'b':>6} {'Y0':>11} {'P0':>11} {'stated':>11} {'operative':>11} {'T*':>9}")
    for s, c, b in itertools.product(floats(args.s), floats(args.c), floats(args.b)):
        u0, w0, _ = canonical_exterior_data(g, args.alpha, b, s, c)
        st = model.state(0.0, u0, w0)
        rep = check_admissibility(st.u, st.psi, pair)
        T = blowup_bounds(rep.Y0, rep.P0, pair.c0).T_star if rep.Y0 > 0 and rep.P0 > 0 else float("nan")
        print(
            f"{s:6.2f} {c:6.2f} {b:6.2f} {rep.Y0:11.4e} {rep.P0:11.4e} "
            f"{rep.stated_margin:11.3e} {rep.operative_margin:11.3e} {T:9.3f}"
        )


if __name__ == "__main__":
    main()
