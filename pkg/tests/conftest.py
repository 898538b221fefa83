import numpy as np
import pytest
import scipy.linalg

from spreadsim.network import GridSpec, assemble_network
from spreadsim.package import default_package, make_grid_floorplan


@pytest.fixture(scope="session")
def pkg():
    return default_package()


@pytest.fixture(scope="session")
def cores(pkg):
    return make_grid_floorplan(8, 16, pkg.die.extent)


@pytest.fixture(scope="session")
def net8(pkg):
    return assemble_network(pkg, GridSpec.for_package(pkg, 8))


def dense_rise(net, p):
    """Reference solve: dense Cholesky on the full matrix, independent of the CG path."""
    factor = scipy.linalg.cho_factor(net.G.toarray())
    return scipy.linalg.cho_solve(factor, np.asarray(p, dtype=float))


def random_die_power(net, rng, scale=2.0):
    p = np.zeros(net.n_cells)
    p[: net.cells_per_layer] = rng.uniform(0.0, scale, net.cells_per_layer)
    return p


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert."""

    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
