import logging

import numpy as np
import pytest

from fracvar.grid import COMPACT, Grid, GridField

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


@pytest.fixture(autouse=True)
def _quiet_decay_warnings():
    # fields of unknown decay log a warning on every operator call
    logging.getLogger("fracvar").setLevel(logging.ERROR)
    yield


def bump_values(x, c=0.0, w=1.0):
    """Smooth bump exp(-1/(1-t^2)) on |x - c| < w."""
    t = (np.asarray(x) - c) / w
    out = np.zeros_like(t, dtype=float)
    m = np.abs(t) < 1
    out[m] = np.exp(-1.0 / (1.0 - t[m] ** 2))
    return out


@pytest.fixture
def grid1d():
    return Grid(1, 8.0, 1024)


@pytest.fixture
def gauss1d(grid1d):
    x = grid1d.centers()
    return GridField(grid1d, np.exp(-np.pi * x**2), COMPACT)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
