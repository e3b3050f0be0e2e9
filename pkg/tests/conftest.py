import numpy as np
import pytest

from nlch.grid import build_grid
from nlch.kernel import build_kernel
from nlch.model import ModelParams, State
from nlch.physics import (ConstantMobility, DegenerateMobility, LogarithmicPotential, Physics,
                          PolynomialPotential, TwoSidedProliferation, ZeroProliferation)


def gaussian(grid, width=0.05, mass=1.0):
    amp = mass / (np.sqrt(2 * np.pi) * width) ** grid.dims
    return build_kernel("gaussian", {"width": width, "amplitude": amp}, grid)


@pytest.fixture
def grid1():
    return build_grid([1.0], [32])


@pytest.fixture
def grid2():
    return build_grid([1.0, 0.5], [12, 8])


@pytest.fixture
def quartic_params():
    g = build_grid([1.0], [32])
    phys = Physics(PolynomialPotential.quartic(), ConstantMobility(1.0), ConstantMobility(1.0),
                   TwoSidedProliferation(0.5))
    return ModelParams(g, gaussian(g, mass=2.0), phys, A=1.0, B=1.0, chi=0.2)


@pytest.fixture
def degenerate_params():
    g = build_grid([1.0], [32])
    phys = Physics(LogarithmicPotential(1.0, 3.0), DegenerateMobility(1.0), ConstantMobility(1.0),
                   TwoSidedProliferation(0.5))
    return ModelParams(g, gaussian(g, mass=4.0), phys, A=1.0, B=1.0, chi=0.0, formulation="degenerate")


def smooth_state(grid, amp=0.3, mean=0.0):
    x = grid.mesh()[0] / grid.lengths[0]
    return State(0.0, mean + amp * np.cos(np.pi * x) + 0.1 * amp * np.cos(3 * np.pi * x),
                 0.5 + 0.1 * np.cos(2 * np.pi * x))


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
