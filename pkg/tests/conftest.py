import json
from pathlib import Path

import pytest

from mlmolp.scenario import bundled_scenario_path, load_problem, load_scenario

DATA = Path(__file__).parent / "data"

_criteria = []   # (id, title, outcome)
_info = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.append((mark.args[0], mark.args[1], "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria and not _info:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, title, res in _criteria:
        tr.write_line(f"[{res}] criterion {cid}: {title}")
    for line in _info:
        tr.write_line(f"[INFO] {line}")


@pytest.fixture
def info():
    return _info.append


@pytest.fixture(scope="session")
def vaccine():
    return load_problem(bundled_scenario_path())


@pytest.fixture(scope="session")
def scenario():
    return load_scenario(bundled_scenario_path())


@pytest.fixture(scope="session")
def frozen_oracle():
    return json.loads((DATA / "oracle_seed0.json").read_text())


@pytest.fixture(scope="session")
def oracle_instances():
    from mlmolp.oracle import random_instances
    return random_instances(200, seed=0)
