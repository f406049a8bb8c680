from __future__ import annotations

import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dcmc.cylinder import LatticeConstants, make_cylinder
from dcmc.lattice import Window, build_lattice, extract_lax, random_seed, vacuum_lattice

settings.register_profile("dcmc", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dcmc")


@pytest.fixture(scope="session")
def constants():
    return LatticeConstants(0.5, 0.5)


@pytest.fixture(scope="session")
def cyl(constants):
    return make_cylinder(constants)


@pytest.fixture(scope="session")
def cyl_mixed():
    return make_cylinder(LatticeConstants(0.5, 0.3))


@pytest.fixture(scope="session")
def vacuum(cyl):
    return vacuum_lattice(cyl, Window.centred(10))


@pytest.fixture(scope="session")
def dressed(cyl_mixed):
    """Generic dressed lattice on a 12x12 window."""
    return build_lattice(random_seed(cyl_mixed.N, 7), cyl_mixed, Window.centred(12))


@pytest.fixture(scope="session")
def dressed_lax(dressed):
    return extract_lax(dressed)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240521)


def pytest_terminal_summary(terminalreporter):
    mods = [m for name, m in sys.modules.items() if name.rsplit(".", 1)[-1] == "test_acceptance"]
    lines = getattr(mods[0], "RESULTS", []) if mods else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
