import numpy as np
import pytest

from gmmd import KernelSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rbf2():
    return KernelSpec("gaussian-rbf", 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
