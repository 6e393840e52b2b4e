import numpy as np
import pytest

# verdict lines collected by the acceptance tests, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import bcsgp as bg
from bcsgp import oracles
from bcsgp.gp import minimize_gp_unconstrained
from bcsgp.twobody import TwoBodySolution


@pytest.fixture(scope="session")
def two_body():
    """Default model: Gaussian well tuned to binding energy 1."""
    return bg.solve_two_body()


@pytest.fixture(scope="session")
def harmonic_trap():
    return bg.HarmonicTrap(1.0)


@pytest.fixture(scope="session")
def macro_grid():
    return bg.build_radial_grid(12.0, 2400, "uniform")


@pytest.fixture(scope="session")
def gp_ground(two_body, harmonic_trap, macro_grid):
    """Unconstrained minimizer at D = 2.0 (supercritical, E_W = 1.5)."""
    return minimize_gp_unconstrained(harmonic_trap, 2.0, two_body.g_bcs, macro_grid)


def make_gaussian_solution(case, r_max=14.0, n=2800):
    """Synthetic two-body solution whose profile is an exact Gaussian.

    The interaction is zero and halpha0 holds the analytic image
    (-Delta + e0) alpha0, so every downstream quantity has a closed form.
    """
    grid = bg.build_radial_grid(r_max, n, "uniform")
    a0 = bg.RadialFunction(grid, case.alpha0(grid.nodes))
    f1 = bg.RadialFunction(
        grid,
        (6.0 * case.gamma_0 + case.e0 - 4.0 * case.gamma_0**2 * grid.nodes**2)
        * case.alpha0(grid.nodes),
    )
    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    return TwoBodySolution(zero, grid, case.e0, a0, f1)


@pytest.fixture(scope="session")
def gaussian_case():
    return oracles.GaussianCase()


@pytest.fixture(scope="session")
def gaussian_solution(gaussian_case):
    return make_gaussian_solution(gaussian_case)


@pytest.fixture(scope="session")
def gaussian_psi(gaussian_case, macro_grid):
    return bg.RadialFunction(macro_grid, gaussian_case.psi(macro_grid.nodes))
