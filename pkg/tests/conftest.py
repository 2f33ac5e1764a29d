"""Shared fixtures. The disc cascade and the welded surface are expensive,
so they are built once per session at refinement level 4 and reused."""

import pytest

from lawsonkit import plateau, surface
from lawsonkit.groups import build_named_groups
from lawsonkit.lattice import Lattice

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def lat32():
    return Lattice(3, 2)


@pytest.fixture(scope="session")
def ng32(lat32):
    return build_named_groups(lat32)


@pytest.fixture(scope="session")
def cascade32(lat32):
    return plateau.solve_disc(lat32, 4)


@pytest.fixture(scope="session")
def disc32(cascade32):
    return cascade32[4][0]


@pytest.fixture(scope="session")
def report32(cascade32):
    return cascade32[4][1]


@pytest.fixture(scope="session")
def surf32(lat32, disc32):
    return surface.assemble(lat32, disc32)
