import json

import numpy as np
import pytest

from mlmolp import report as rpt
from mlmolp.multilevel import alpha_grid, alpha_sweep, run_algorithm2
from mlmolp.scenario import load_problem

from conftest import DATA


@pytest.fixture(scope="module")
def sweep(vaccine):
    return alpha_sweep(vaccine, alpha_grid(2, step=0.25))


def test_fmt():
    assert rpt.fmt(0.1 + 0.2) == "0.3"
    assert rpt.fmt(1 / 3) == "0.333333333333"
    assert rpt.fmt(None) == ""
    assert rpt.r12([1 / 3, 2.0]) == [0.333333333333, 2.0]


def test_one_report_one_row(vaccine):
    rep = run_algorithm2(vaccine, [0.5, 0.5], "adaptive")
    rows = rpt.read_csv(rpt.to_csv([rep], vaccine))
    assert len(rows) == 1
    assert list(rows[0]) == rpt.csv_columns(vaccine)
    assert rpt.csv_columns(vaccine)[:7] == ["alpha1", "alpha2", "backend", "status", "f1", "f2", "f3"]
    assert rpt.csv_columns(vaccine)[-2:] == ["iterations_total", "wall_ms"]


def test_sweep_rows(sweep, vaccine):
    rows = rpt.read_csv(rpt.to_csv(sweep, vaccine))
    assert len(rows) == 50
    assert {r["backend"] for r in rows} == {"adaptive", "simplex"}


def test_csv_reparse_matches_memory(sweep, vaccine):
    rows = rpt.read_csv(rpt.to_csv(sweep, vaccine))
    names = vaccine.variable_names()
    for rep, row in zip(sweep, rows):
        assert row["status"].startswith(rep.status)
        if not rep.ok:
            assert row["f1"] == "" and row["x11"] == ""
            continue
        got = np.array([float(row[nm]) for nm in names])
        np.testing.assert_allclose(got, rep.compromise, rtol=1e-11, atol=1e-300)
        f = np.array([float(row[f"f{p}"]) for p in (1, 2, 3)])
        np.testing.assert_allclose(f, rep.objective_values, rtol=1e-11)


def test_failed_row_status():
    prob = load_problem(DATA / "toy3_infeasible.json")
    reps = alpha_sweep(prob, alpha_grid(2, values=[1.0]), backends=("simplex",))
    (row,) = rpt.read_csv(rpt.to_csv(reps, prob))
    assert row["status"] == "infeasible:level3"
    assert row["a"] == ""


def test_json_round_trip_is_stable(sweep, vaccine):
    text = rpt.to_json(sweep, vaccine)
    doc = json.loads(text)
    assert doc["variables"] == list(vaccine.variable_names())
    assert len(doc["reports"]) == 50
    first = doc["reports"][0]
    assert first["compromise"] == rpt.r12(sweep[0].compromise)
    # a second pass through the 12-digit rounding changes nothing
    for d in doc["reports"]:
        for key in ("compromise", "objective_values", "alphas"):
            assert rpt.r12(d[key]) == d[key]
        for b in d["bounds_history"]:
            assert rpt.r12(b["l"]) == b["l"] and rpt.r12(b["u"]) == b["u"]


def test_write_report(tmp_path, sweep, vaccine):
    rpt.write_report(sweep, vaccine, "csv", tmp_path / "r.csv")
    rpt.write_report(sweep, vaccine, "json", tmp_path / "r.json")
    assert (tmp_path / "r.csv").read_text().startswith("# constraint matrix is 59x27")
    assert json.loads((tmp_path / "r.json").read_text())["schema_version"] == 1
    with pytest.raises(ValueError):
        rpt.write_report([], vaccine, "csv", tmp_path / "x.csv")
    with pytest.raises(ValueError):
        rpt.write_report(sweep, vaccine, "xml", tmp_path / "x.xml")


def test_strip_timing():
    text = "# note\na,wall_ms,b,adaptive_peak_kib\n1,2.5,3,9\n"
    assert rpt.strip_timing(text) == "# note\na,b\n1,3\n"


def test_format_table():
    out = rpt.format_table(["a", "bb"], [["1", "2"], ["333", "4"]])
    assert out.splitlines()[0] == "  a  bb"
    assert out.splitlines()[2] == "333   4"
