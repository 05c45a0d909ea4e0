import numpy as np
import pytest

from axiblow.diagnostics import (
    FunctionalSeries,
    blowup_bounds,
    build_test_pair,
    check_admissibility,
    functionals,
    resolution_indicator,
    riccati_residuals,
)
from axiblow.dynamics import Model, StepControl, canonical_exterior_data, run_model
from axiblow.elliptic import BcSpec
from axiblow.grid import Grid

# canonical admissible exterior run
ALPHA, BETA, R_MAX = 3.0, 6.0, 4.0
S, C, B = 2.0, 1.0, 6.0
RESOLVED_RHO = 0.05

ACCEPTANCE = {}


class ExteriorRun:
    def __init__(self, Nr, Nz, cfl, t_end=np.inf):
        self.grid = Grid.exterior(Nr, Nz, r_max=R_MAX)
        self.pair = build_test_pair(self.grid, ALPHA)
        u0, omega0, _ = canonical_exterior_data(self.grid, ALPHA, B, S, C)
        model = Model(self.grid, BcSpec.exterior_robin(BETA))
        state = model.state(0.0, u0, omega0)
        self.admissibility = check_admissibility(state.u, state.psi, self.pair)
        self.series = FunctionalSeries()

        def observer(st, dt):
            f = functionals(st.u, st.psi, self.pair)
            self.series.append(st.t, dt, f, resolution=resolution_indicator(self.grid, st.u))

        self.ctrl = StepControl(cfl_c=cfl)
        self.result = run_model(model, state, self.ctrl, t_end, observer)
        self.residuals = riccati_residuals(self.series, self.pair.c0)
        self.bounds = blowup_bounds(self.admissibility.Y0, self.admissibility.P0, self.pair.c0, ALPHA)
        self.t = self.series.array("times")
        rho = self.series.array("resolution")
        bad = np.flatnonzero(rho > RESOLVED_RHO)
        self.t_resolved = self.t[bad[0] - 1] if bad.size else self.t[-1]

    def array(self, name):
        return self.series.array(name)


@pytest.fixture(scope="session")
def exterior_base():
    return ExteriorRun(257, 129, 0.1)


@pytest.fixture(scope="session")
def exterior_refined(exterior_base):
    return ExteriorRun(513, 257, 0.05, t_end=exterior_base.t_resolved)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
