import csv
import json

import numpy as np
import pytest

from mlmolp.errors import ScenarioError
from mlmolp.scenario import (bundled_scenario_path, build_vaccine_model, load_problem,
                             load_scenario, problem_to_dict)


def write_csv_scenario(folder, sc):
    with open(folder / "regions.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "population", "cases", "capacity", "equity_target", "lambda"])
        for r in sc.regions:
            w.writerow([r.region_id, r.population, r.cases, r.capacity, r.equity_target,
                        sc.weights.lam[r.region_id]])
    with open(folder / "hospitals.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "id", "vulnerable", "beds", "xi", "omega"])
        for r in sc.regions:
            for j, h in enumerate(sc.hospitals_of(r.region_id)):
                w.writerow([r.region_id, h.hospital_id, h.vulnerable, h.beds,
                            sc.weights.xi[r.region_id][j], sc.weights.omega[r.region_id][j]])


def bundled_doc():
    return json.loads(bundled_scenario_path().read_text())


def test_bundled_counts_and_england(scenario):
    assert len(scenario.regions) == 4 and len(scenario.hospitals) == 22
    eng = scenario.regions[0]
    assert (eng.region_id, eng.population, eng.cases, eng.capacity, eng.equity_target) == (
        "England", 56.48, 8.55, 51.2, 80)
    assert [len(scenario.hospitals_of(r.region_id)) for r in scenario.regions] == [8, 5, 5, 4]
    assert scenario.production_cap == 100


def test_model_shape_and_variable_order(vaccine):
    assert vaccine.A.shape == (59, 27)
    assert vaccine.partition == (1, 4, 22)
    names = vaccine.variable_names()
    assert names[:6] == ("x11", "x21", "x22", "x23", "x24", "x31_1")
    assert names[-1] == "x34_4"
    assert vaccine.coefficient_gate is False
    assert "59x27" in vaccine.notes[0]


def test_model_rows(vaccine):
    A, b = vaccine.A, vaccine.b
    assert b[0] == 100 and A[0, 0] == 1 and np.count_nonzero(A[0]) == 1
    np.testing.assert_array_equal(b[1:5], [56.48, 5.45, 3.16, 1.91])
    np.testing.assert_array_equal(b[5:9], [-8.55, -0.45, -0.15, -0.1])
    np.testing.assert_array_equal(b[9:13], [-51.2, -4.95, -2.87, -1.78])
    np.testing.assert_array_equal(A[13, :5], [-1, 1, 1, 1, 1])
    # RFH is the first hospital: bed cap row 14, vulnerable floor row 36
    assert b[14] == 0.030 and A[14, 5] == 1
    assert b[36] == -0.025 and A[36, 5] == -1
    last = A[-1]
    np.testing.assert_array_equal(last[1:5], -1)
    np.testing.assert_array_equal(last[5:], 1)
    assert b[-1] == 0


def test_objectives(vaccine):
    C = vaccine.objectives
    np.testing.assert_array_equal(C[0], np.eye(27)[0])
    np.testing.assert_array_equal(C[1, 1:5], [0.4, 0.3, 0.2, 0.1])
    assert np.count_nonzero(C[1]) == 4
    # printed weights, not lambda * xi (0.4 * 0.25 would give 0.10)
    assert C[2, 5 + 3] == 0.08
    assert np.count_nonzero(C[2]) == 22


def test_production_cap_override(scenario):
    prob = build_vaccine_model(scenario, production_cap=80)
    assert prob.b[0] == 80


def test_zero_hospital_region_contributes_no_rows(scenario):
    from dataclasses import replace
    keep = [h for h in scenario.hospitals if h.region_id != "Wales"]
    w = replace(scenario.weights, xi={**scenario.weights.xi, "Wales": []},
                omega={**scenario.weights.omega, "Wales": []})
    prob = build_vaccine_model(replace(scenario, hospitals=keep, weights=w))
    assert prob.A.shape == (59 - 10, 27 - 5)
    assert prob.partition == (1, 4, 17)


def test_empty_hospitals(tmp_path):
    doc = bundled_doc()
    doc["hospitals"] = []
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="no hospitals"):
        load_scenario(p)


def test_vulnerable_above_beds_names_hospital(tmp_path):
    doc = bundled_doc()
    doc["hospitals"][9]["vulnerable"] = 0.5     # Scotland, second hospital
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match=r"\(2,2\) 9W"):
        load_scenario(p)


def test_region_invariant(tmp_path):
    doc = bundled_doc()
    doc["regions"][1]["cases"] = 9.0
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="Scotland"):
        load_scenario(p)


def test_weight_count_mismatch(tmp_path):
    doc = bundled_doc()
    doc["weights"]["omega"]["Wales"].pop()
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="Wales"):
        load_scenario(p)


def test_json_parse_error_has_line(tmp_path):
    p = tmp_path / "s.json"
    p.write_text('{\n  "schema_version": 1,\n  "regions": [,]\n}\n')
    with pytest.raises(ScenarioError, match="line 3"):
        load_scenario(p)


def test_schema_version_required(tmp_path):
    doc = bundled_doc()
    doc["schema_version"] = 7
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="schema_version"):
        load_scenario(p)


def test_csv_directory_round_trip(tmp_path, scenario, vaccine):
    write_csv_scenario(tmp_path, scenario)
    sc2 = load_scenario(tmp_path)
    assert sc2.regions == scenario.regions and sc2.hospitals == scenario.hospitals
    prob = load_problem(tmp_path)
    np.testing.assert_array_equal(prob.A, vaccine.A)
    np.testing.assert_array_equal(prob.objectives, vaccine.objectives)


def test_csv_error_line_number(tmp_path, scenario):
    write_csv_scenario(tmp_path, scenario)
    lines = (tmp_path / "hospitals.csv").read_text().splitlines()
    lines[4] = lines[4].replace("0.032", "abc", 1)
    (tmp_path / "hospitals.csv").write_text("\n".join(lines) + "\n")
    with pytest.raises(ScenarioError, match="hospitals.csv line 5"):
        load_scenario(tmp_path)


def test_generic_problem_round_trip(tmp_path, vaccine):
    p = tmp_path / "p.json"
    p.write_text(json.dumps(problem_to_dict(vaccine)))
    prob = load_problem(p)
    np.testing.assert_array_equal(prob.A, vaccine.A)
    assert prob.variable_names() == vaccine.variable_names()
    assert prob.coefficient_gate is False


def test_generic_problem_missing_field(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"schema_version": 1, "kind": "multilevel", "partition": [1, 1]}))
    with pytest.raises(ScenarioError, match="objectives"):
        load_problem(p)
