import numpy as np
import pytest

import bcsgp as bg
from bcsgp import oracles, twobody
from bcsgp.grids import ConfigurationError

from conftest import make_gaussian_solution


def test_square_well_binding_energy():
    grid = bg.build_radial_grid(20.0, 4000)
    sol = bg.solve_ground_state(bg.SphericalWell(4.0, 1.0), grid)
    exact = oracles.square_well_binding(4.0, 1.0)
    assert abs(sol.e0 - exact) < 1e-8


def test_no_bound_state_raises():
    grid = bg.build_radial_grid(20.0, 2000)
    with pytest.raises(twobody.NoBoundStateError):
        bg.solve_ground_state(bg.SphericalWell(1.0, 1.0), grid)


def test_ground_state_positive_and_normalized(two_body):
    assert np.all(two_body.alpha0.values > 0.0)
    assert abs(two_body.alpha0.norm() - 1.0) < 1e-12


def test_discrete_eigenvalue_consistency(two_body):
    # e0_disc pairs exactly with the stored profile on its grid
    assert abs(two_body.e0_disc - two_body.e0) < 1e-4
    from bcsgp.pairing import _binding_form
    from bcsgp.grids import _potential_values

    v = _potential_values(two_body.interaction, two_body.grid)
    res = _binding_form(two_body.alpha0, two_body.alpha0, v, two_body.e0_disc)
    assert abs(res) < 1e-10


def test_spectral_gap_positive(two_body):
    assert two_body.gap is not None
    assert two_body.gap > 0.0
    # the strengthened operator keeps a gap of order E0 for this model
    assert two_body.gap > 0.5


def test_gap_violated_raises(two_body):
    sol = bg.solve_ground_state(two_body.interaction, two_body.grid)
    with pytest.raises(twobody.GapViolatedError):
        bg.compute_spectral_gap(sol, epsilon=0.99)


def test_gap_epsilon_validation(two_body):
    sol = bg.solve_ground_state(two_body.interaction, two_body.grid)
    with pytest.raises(ConfigurationError):
        bg.compute_spectral_gap(sol, epsilon=1.5)


def test_g_bcs_gaussian_oracle(gaussian_case, gaussian_solution):
    got = twobody.compute_g_bcs(gaussian_solution)
    assert abs(got - oracles.gaussian_g_bcs(gaussian_case)) < 1e-9


def test_g_bcs_default_model_positive(two_body):
    assert two_body.g_bcs > 0.0
    # frozen regression value for the tuned default interaction
    assert abs(two_body.g_bcs - 29.4744729587) < 1e-6


def test_decay_rate_matches_binding(two_body):
    # exterior tail exp(-sqrt(E0) r)/r
    assert abs(two_body.decay_rate - np.sqrt(two_body.e0)) < 0.05 * np.sqrt(two_body.e0)


def test_tuned_well_hits_target(two_body):
    assert abs(two_body.e0 - 1.0) < 1e-9


def test_diagnostics_report(two_body):
    m = two_body.moments
    for key in ("l2_sq", "l1", "r2_mean", "v_alpha_l1", "grad_l2_sq", "hat_l4_4"):
        assert key in m
        assert np.isfinite(m[key])
    assert abs(m["l2_sq"] - 1.0) < 1e-12
    # kinetic identity: ||grad alpha0||^2 = -E0 - <V> on the bound state
    assert m["grad_l2_sq"] > 0.0


def test_gaussian_synthetic_zero_gap_inputs(gaussian_case):
    # synthetic profile behaves like a normalized bound state
    sol = make_gaussian_solution(gaussian_case)
    assert abs(sol.alpha0.norm() - 1.0) < 1e-10
