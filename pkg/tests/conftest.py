import numpy as np
import pytest

from mrfm_detect.signal_model import SampleGrid, ScenarioConfig

NOMINAL_AMPLITUDE = 0.928

_criteria = []


@pytest.fixture
def nominal_grid():
    return SampleGrid(3.0, 5e-4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scenario():
    return ScenarioConfig(NOMINAL_AMPLITUDE, 1.0, SampleGrid(3.0, 5e-4), snr_db=-20.0)


@pytest.fixture
def criterion():
    """Record an acceptance line; printed in the terminal summary."""

    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _criteria.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
