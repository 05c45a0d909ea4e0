import csv
import json

import numpy as np
import pytest

from axiblow.config import parse_config
from axiblow.diagnostics import build_test_pair, check_admissibility
from axiblow.dynamics import Model
from axiblow.elliptic import BcSpec
from axiblow.grid import Grid
from axiblow.scenarios import ANCHOR, decay_initial_data, interior_blowup_data, run_scenario


def run(tmp_path, text):
    rep = run_scenario(parse_config(text), str(tmp_path))
    rows = list(csv.reader(open(rep.csv_path, newline=""))) if rep.csv_path else None
    return rep, rows


def test_exterior_outputs(tmp_path):
    text = "[scenario]\nkind = BlowupExterior\n[grid]\nNr = 65\nNz = 33\nr_max = 4.0\n[params]\nalpha = 3.0\n[control]\nt_end = 0.1\n"
    rep, rows = run(tmp_path, text)
    assert rep.exit_code == 0
    assert rows[0][:7] == ["t", "dt", "sup_u", "L2u", "U2phi", "Y", "P"]
    assert float(rows[-1][0]) == pytest.approx(0.1)
    raw = open(rep.csv_path, "rb").read()
    assert b"\r" not in raw
    summary = json.loads(open(rep.json_path).read())
    assert summary["admissibility"]["admissible"]
    assert summary["termination"]["reason"] == "t_end reached"
    for v in summary["verdicts"]:
        assert v["anchor"] == ANCHOR[v["check"]]
        assert v["status"] in ("pass", "fail", "marginal", "skipped")
    # no blow-up before t_end, so the blow-up-time verdict fails honestly
    assert {v["check"]: v["status"] for v in summary["verdicts"]}["blowup_time"] == "fail"


def test_interior_data_meets_boundary_conditions():
    g = Grid.interior(33, 33)
    pair = build_test_pair(g, 1.0)
    u0, omega0, psi0 = interior_blowup_data(g, pair, -3.0, 2.0, 4.0)
    model = Model(g, BcSpec.interior_robin(pair.beta))
    state = model.state(0.0, u0, omega0)
    assert np.max(np.abs(state.psi - psi0)) < 1e-2 * np.max(np.abs(psi0))
    assert np.max(np.abs(psi0[-1])) < 1e-14 and np.max(np.abs(psi0[:, -1])) < 1e-14
    rep = check_admissibility(state.u, state.psi, pair)
    assert rep.admissible


def test_interior_scenario(tmp_path):
    text = (
        "[scenario]\nkind = BlowupInterior\n[grid]\nNr = 33\nNz = 33\n[params]\nalpha = 1.0\n"
        "[data]\ns = 2.0\nc = 4.0\nb = -3.0\n[control]\nt_end = 0.01\n"
    )
    rep, rows = run(tmp_path, text)
    assert rep.exit_code == 0
    assert "not a derived constant" in rep.summary["parameters"]["c1_source"]
    assert len(rows) > 3


def test_decay_zero_data_consumes_no_margin(tmp_path):
    text = "[scenario]\nkind = GlobalDecay\n[grid]\nNr = 33\nNz = 33\n[data]\ns = 0.0\nb = 0.0\n[params]\nM = 2.0\n"
    rep, rows = run(tmp_path, text)
    assert rep.summary["all_pass"]
    assert all(v == 0.0 for v in rep.summary["margins_consumed"].values())
    assert float(rows[-1][0]) == pytest.approx(2.5)


def test_decay_initial_data_vanishes_on_boundary():
    g = Grid.interior(17, 17)
    ut0, v0 = decay_initial_data(g, 1.0, 1.0)
    for f in (ut0, v0):
        assert np.all(f[-1] == 0) and np.all(f[:, 0] == 0) and np.all(f[:, -1] == 0)
    assert np.all(ut0 >= 0)


def test_elliptic_scenario_subset(tmp_path):
    text = "[scenario]\nkind = EllipticConvergence\n[convergence]\nregimes = dirichlet\ninterior_levels = 17,33,65\n"
    rep, rows = run(tmp_path, text)
    assert rep.summary["all_pass"]
    assert [r[0] for r in rows[1:]] == ["dirichlet"] * 3


def test_invalid_config_does_not_run(tmp_path):
    rep = run_scenario(parse_config("[scenario]\nkind = GlobalDecay\n[params]\nM = -1\n"), str(tmp_path))
    assert rep.exit_code == 2 and rep.csv_path is None
