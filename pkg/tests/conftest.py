"""Shared fixtures plus the acceptance-criteria report.

Acceptance tests register a one-line verdict through record_criterion; the
terminal summary hook prints the collected lines after the test run so the
pass/fail status of every criterion is visible even when all tests pass.
"""

import importlib.resources

import numpy as np
import pytest

_CRITERIA = []


def record_criterion(index: int, name: str, passed: bool, detail: str) -> None:
    _CRITERIA.append((index, name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for index, name, passed, detail in sorted(_CRITERIA):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {index:2d} {verdict}  {name}: {detail}")


def scenario_path(name: str) -> str:
    """Filesystem path of a scenario JSON shipped inside the package."""
    return str(importlib.resources.files("graspsim") / "scenarios" / f"{name}.json")


def read_csv_columns(path):
    """Timeseries CSV as {column name: float array}."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.shape == ():  # single row
        data = data.reshape(1)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


@pytest.fixture
def rng():
    return np.random.default_rng(0)
