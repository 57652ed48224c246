"""Scenario ingestion and assembly of the three-level vaccine distribution model.

A scenario is either one JSON document (``regions``, ``hospitals``, ``weights``,
``production_cap``) or a directory holding ``regions.csv`` and
``hospitals.csv`` with the weights as extra columns. All quantities are in
millions. A JSON document with ``"kind": "multilevel"`` instead carries a
generic problem (``partition``, ``objectives``, ``A``, ``b``).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ScenarioError
from .multilevel import MultilevelProblem

SCHEMA_VERSION = 1
DEFAULT_CAP = 100.0
REGION_COLUMNS = ("id", "population", "cases", "capacity", "equity_target", "lambda")
HOSPITAL_COLUMNS = ("region", "id", "vulnerable", "beds", "xi", "omega")


@dataclass(frozen=True)
class RegionRecord:
    region_id: str
    population: float
    cases: float
    capacity: float
    equity_target: float

    def validate(self):
        if not self.population >= self.cases >= 0:
            raise ScenarioError(f"region {self.region_id}: need population >= cases >= 0")
        if self.capacity < 0:
            raise ScenarioError(f"region {self.region_id}: capacity must be nonnegative")


@dataclass(frozen=True)
class HospitalRecord:
    region_id: str
    hospital_id: str
    vulnerable: float
    beds: float


@dataclass
class WeightTable:
    lam: dict
    xi: dict
    omega: dict


@dataclass
class Scenario:
    regions: list
    hospitals: list
    weights: WeightTable
    production_cap: float = DEFAULT_CAP
    source: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def hospitals_of(self, region_id: str) -> list:
        return [h for h in self.hospitals if h.region_id == region_id]


def bundled_scenario_path() -> Path:
    return Path(str(resources.files("mlmolp") / "data" / "uk_vaccine_2021.json"))


def _num(value, what: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{what}: expected a number, got {value!r}") from None
    if not np.isfinite(v):
        raise ScenarioError(f"{what}: value must be finite")
    return v


def validate_scenario(sc: Scenario) -> Scenario:
    if not sc.regions:
        raise ScenarioError("no regions")
    if not sc.hospitals:
        raise ScenarioError("no hospitals")
    ids = [r.region_id for r in sc.regions]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate region ids")
    for r in sc.regions:
        r.validate()
    for i, r in enumerate(sc.regions, 1):
        hs = sc.hospitals_of(r.region_id)
        for j, h in enumerate(hs, 1):
            if not 0 <= h.vulnerable <= h.beds:
                raise ScenarioError(
                    f"hospital ({i},{j}) {h.hospital_id} in {r.region_id}: need 0 <= vulnerable <= beds"
                )
        lam = sc.weights.lam.get(r.region_id)
        if lam is None or lam <= 0:
            raise ScenarioError(f"region {r.region_id}: lambda weight must be positive")
        for name, table in (("xi", sc.weights.xi), ("omega", sc.weights.omega)):
            vals = table.get(r.region_id, [])
            if len(vals) != len(hs):
                raise ScenarioError(
                    f"region {r.region_id}: {len(vals)} {name} weights for {len(hs)} hospitals"
                )
            if any(v < 0 for v in vals):
                raise ScenarioError(f"region {r.region_id}: {name} weights must be nonnegative")
    stray = {h.region_id for h in sc.hospitals} - set(ids)
    if stray:
        raise ScenarioError(f"hospitals reference unknown regions: {sorted(stray)}")
    if sc.production_cap < 0:
        raise ScenarioError("production_cap must be nonnegative")
    return sc


def _scenario_from_dict(doc: dict, source: str) -> Scenario:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"{source}: unsupported schema_version {version!r}")
    try:
        regions = [
            RegionRecord(str(r["id"]), _num(r["population"], f"region {r['id']} population"),
                         _num(r["cases"], f"region {r['id']} cases"),
                         _num(r["capacity"], f"region {r['id']} capacity"),
                         _num(r.get("equity_target", 0), f"region {r['id']} equity_target"))
            for r in doc.get("regions", [])
        ]
        hospitals = [
            HospitalRecord(str(h["region"]), str(h["id"]),
                           _num(h["vulnerable"], f"hospital {h['id']} vulnerable"),
                           _num(h["beds"], f"hospital {h['id']} beds"))
            for h in doc.get("hospitals", [])
        ]
        w = doc.get("weights", {})
        weights = WeightTable(
            lam={k: _num(v, f"lambda[{k}]") for k, v in w.get("lambda", {}).items()},
            xi={k: [_num(v, f"xi[{k}]") for v in vs] for k, vs in w.get("xi", {}).items()},
            omega={k: [_num(v, f"omega[{k}]") for v in vs] for k, vs in w.get("omega", {}).items()},
        )
    except KeyError as exc:
        raise ScenarioError(f"{source}: missing field {exc.args[0]!r}") from None
    cap = _num(doc.get("production_cap", DEFAULT_CAP), "production_cap")
    meta = {k: doc[k] for k in ("description",) if k in doc}
    return validate_scenario(Scenario(regions, hospitals, weights, cap, source, meta))


def _read_csv(path: Path, columns: tuple) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise ScenarioError(f"{path.name} line 1: missing columns {missing}")
        for row in reader:
            line = reader.line_num
            if None in row.values() or None in row:
                raise ScenarioError(f"{path.name} line {line}: wrong number of fields")
            rows.append((line, row))
    return rows


def _scenario_from_csv(folder: Path) -> Scenario:
    regions, lam = [], {}
    for line, row in _read_csv(folder / "regions.csv", REGION_COLUMNS):
        where = f"regions.csv line {line}"
        rid = row["id"].strip()
        regions.append(RegionRecord(rid, _num(row["population"], where), _num(row["cases"], where),
                                    _num(row["capacity"], where), _num(row["equity_target"], where)))
        lam[rid] = _num(row["lambda"], where)
    hospitals, xi, omega = [], {}, {}
    for line, row in _read_csv(folder / "hospitals.csv", HOSPITAL_COLUMNS):
        where = f"hospitals.csv line {line}"
        rid = row["region"].strip()
        hospitals.append(HospitalRecord(rid, row["id"].strip(), _num(row["vulnerable"], where),
                                        _num(row["beds"], where)))
        xi.setdefault(rid, []).append(_num(row["xi"], where))
        omega.setdefault(rid, []).append(_num(row["omega"], where))
    cap = DEFAULT_CAP
    cap_file = folder / "production_cap.txt"
    if cap_file.exists():
        cap = _num(cap_file.read_text().strip(), "production_cap.txt")
    return validate_scenario(Scenario(regions, hospitals, WeightTable(lam, xi, omega), cap,
                                      str(folder)))


def _read_json(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path.name} line {exc.lineno}: {exc.msg}") from None


def load_scenario(path) -> Scenario:
    """Read and validate a vaccine scenario from a JSON file or a CSV directory."""
    path = Path(path)
    if path.is_dir():
        return _scenario_from_csv(path)
    doc = _read_json(path)
    if doc.get("kind", "vaccine") != "vaccine":
        raise ScenarioError(f"{path.name}: not a vaccine scenario")
    return _scenario_from_dict(doc, path.name)


def build_vaccine_model(scenario: Scenario, production_cap: Optional[float] = None
                        ) -> MultilevelProblem:
    """Three-level model: producer (1 var), regions (one per region), hospitals.

    Rows, in order: production cap; regional population caps; regional case
    floors; regional capacity floors; regional total within production;
    hospital bed caps; hospital vulnerable floors; hospital total within
    regional total.
    """
    cap = scenario.production_cap if production_cap is None else float(production_cap)
    R = scenario.regions
    H = [h for r in R for h in scenario.hospitals_of(r.region_id)]
    nr, nh = len(R), len(H)
    n = 1 + nr + nh
    rows, rhs = [], []

    def row(coefs: dict, b: float):
        a = np.zeros(n)
        for j, v in coefs.items():
            a[j] = v
        rows.append(a)
        rhs.append(b)

    reg = [1 + i for i in range(nr)]
    hosp = [1 + nr + k for k in range(nh)]
    row({0: 1.0}, cap)
    for i, r in enumerate(R):
        row({reg[i]: 1.0}, r.population)
    for i, r in enumerate(R):
        row({reg[i]: -1.0}, -r.cases)
    for i, r in enumerate(R):
        row({reg[i]: -1.0}, -r.capacity)
    row({**{j: 1.0 for j in reg}, 0: -1.0}, 0.0)
    for k, h in enumerate(H):
        row({hosp[k]: 1.0}, h.beds)
    for k, h in enumerate(H):
        row({hosp[k]: -1.0}, -h.vulnerable)
    row({**{j: 1.0 for j in hosp}, **{j: -1.0 for j in reg}}, 0.0)

    expected = 1 + 3 * nr + 1 + 2 * nh + 1
    assert len(rows) == expected, "constraint block count mismatch"

    C = np.zeros((3, n))
    C[0, 0] = 1.0
    for i, r in enumerate(R):
        C[1, reg[i]] = scenario.weights.lam[r.region_id]
    k = 0
    for r in R:
        for w in scenario.weights.omega[r.region_id]:
            C[2, hosp[k]] = w
            k += 1

    names = ["x11"] + [f"x2{i + 1}" for i in range(nr)]
    for i, r in enumerate(R):
        names += [f"x3{i + 1}_{j + 1}" for j in range(len(scenario.hospitals_of(r.region_id)))]
    notes = (f"constraint matrix is {len(rows)}x{n} (block enumeration); "
             "the stated 29x27 order is not reproducible from the listed blocks",)
    return MultilevelProblem(partition=(1, nr, nh), objectives=C, A=np.vstack(rows),
                             b=np.array(rhs), names=tuple(names), coefficient_gate=False,
                             notes=notes)


def _problem_from_dict(doc: dict, source: str) -> MultilevelProblem:
    try:
        return MultilevelProblem(partition=tuple(doc["partition"]),
                                 objectives=np.array(doc["objectives"], dtype=float),
                                 A=np.array(doc["A"], dtype=float),
                                 b=np.array(doc["b"], dtype=float),
                                 names=tuple(doc["names"]) if doc.get("names") else None,
                                 coefficient_gate=bool(doc.get("coefficient_gate", True)))
    except KeyError as exc:
        raise ScenarioError(f"{source}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{source}: {exc}") from None


def load_problem(path, production_cap: Optional[float] = None) -> MultilevelProblem:
    """Any supported input file turned into a MultilevelProblem."""
    path = Path(path)
    if path.is_dir():
        return build_vaccine_model(_scenario_from_csv(path), production_cap)
    doc = _read_json(path)
    kind = doc.get("kind", "vaccine")
    if kind == "multilevel":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ScenarioError(f"{path.name}: unsupported schema_version {doc.get('schema_version')!r}")
        return _problem_from_dict(doc, path.name)
    if kind != "vaccine":
        raise ScenarioError(f"{path.name}: unknown kind {kind!r}")
    return build_vaccine_model(_scenario_from_dict(doc, path.name), production_cap)


def problem_to_dict(problem: MultilevelProblem) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "multilevel",
        "partition": list(problem.partition),
        "objectives": problem.objectives.tolist(),
        "A": problem.A.tolist(),
        "b": problem.b.tolist(),
        "names": list(problem.variable_names()),
        "coefficient_gate": problem.coefficient_gate,
    }
