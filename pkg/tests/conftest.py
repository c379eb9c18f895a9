"""Shared fixtures and the acceptance-criteria summary printed after the run."""
from __future__ import annotations

import numpy as np
import pytest

from ddlab.grid import make_grid

ACCEPTANCE_LINES: dict = {}


def record_acceptance(key, line: str) -> None:
    ACCEPTANCE_LINES[key] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=str):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid_1024():
    return make_grid(1024, 30.0)


@pytest.fixture(scope="session")
def grid_4096():
    return make_grid(4096, 200.0)
