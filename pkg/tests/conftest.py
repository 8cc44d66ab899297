"""Shared fixtures; expensive phase tables are built once per session."""

from __future__ import annotations

import pytest

from optwkb.cheb import make_grid
from optwkb.wkb import phase_table

from _util import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k.split()[1])):
        terminalreporter.write_line(RESULTS[key])


@pytest.fixture(scope="session")
def airy_table_small():
    """a = x on [1, 2], M = 25, n_max = 12 at 113 bits."""
    return phase_table("x", make_grid(25, 1, 2, 113), 12, p=113)


@pytest.fixture(scope="session")
def trinomial_table():
    """a = (1+x+x^2)^-2 on [0, 1], M = 30, n_max = 82 at 192 bits."""
    return phase_table("(1+x+x^2)^-2", make_grid(30, 0, 1, 192), 82, p=192)


@pytest.fixture(scope="session")
def airy_table_mid():
    """a = x on [1, 2], M = 40, n_max = 60 at 256 bits (orders up to eps = 2^-5)."""
    return phase_table("x", make_grid(40, 1, 2, 256), 60, p=256)


@pytest.fixture(scope="session")
def airy_table_big():
    """a = x on [1, 2], M = 100, n_max = 200 at 320 bits (eps down to 2^-7)."""
    return phase_table("x", make_grid(100, 1, 2, 320), 200, p=320)


@pytest.fixture(scope="session")
def exp5_table_big():
    """a = exp(5x) on [0, 1], M = 60, n_max = 130 at 320 bits."""
    return phase_table("exp(5*x)", make_grid(60, 0, 1, 320), 130, p=320)

