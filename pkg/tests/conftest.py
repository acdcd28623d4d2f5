import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20111023)


def within_sigma(observed, expected, sigma, k=3.0):
    return abs(observed - expected) <= k * sigma


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
