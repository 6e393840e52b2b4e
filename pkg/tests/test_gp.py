import numpy as np
import pytest

import bcsgp as bg
from bcsgp import gp
from bcsgp.grids import ConfigurationError


def test_trap_ground_harmonic(macro_grid):
    e_w, psi_w = gp.solve_trap_ground(bg.HarmonicTrap(1.0), macro_grid)
    assert abs(e_w - 1.5) < 1e-8
    target = np.exp(-macro_grid.nodes**2)
    target /= np.sqrt(macro_grid.l2_norm_sq(target))
    overlap = psi_w.dot(bg.RadialFunction(macro_grid, target))
    assert overlap > 1.0 - 1e-8


def test_subcritical_minimizer_is_zero(two_body, harmonic_trap, macro_grid):
    res = gp.minimize_gp_unconstrained(harmonic_trap, 1.4, two_body.g_bcs, macro_grid)
    assert res.energy == 0.0
    assert res.mass == 0.0
    assert res.converged


def test_supercritical_minimizer(gp_ground):
    assert gp_ground.converged
    assert gp_ground.energy < 0.0
    assert gp_ground.mass > 0.0
    assert gp_ground.grad_residual < 1e-7
    assert np.all(gp_ground.psi.values >= 0.0)


def test_energy_matches_minimizer(gp_ground, harmonic_trap, two_body):
    e = gp.gp_energy(gp_ground.psi, harmonic_trap, gp_ground.d, two_body.g_bcs)
    assert abs(e - gp_ground.energy) < 1e-12 * max(1.0, abs(gp_ground.energy))


def test_gradient_vs_central_differences(gp_ground, harmonic_trap, two_body):
    grid = gp_ground.psi.grid
    rng = np.random.default_rng(5)
    base = bg.RadialFunction(grid, gp_ground.psi.values + 0.05 * np.exp(-grid.nodes**2))
    grad = gp.gp_gradient(base, harmonic_trap, gp_ground.d, two_body.g_bcs)
    eps = 1e-6
    for _ in range(20):
        direction = np.zeros(grid.n)
        for _ in range(3):
            center = rng.uniform(0.0, 4.0)
            width = rng.uniform(0.5, 2.0)
            direction += rng.standard_normal() * np.exp(-((grid.nodes - center) / width) ** 2)
        phi = bg.RadialFunction(grid, direction)
        plus = gp.gp_energy(
            bg.RadialFunction(grid, base.values + eps * phi.values),
            harmonic_trap, gp_ground.d, two_body.g_bcs,
        )
        minus = gp.gp_energy(
            bg.RadialFunction(grid, base.values - eps * phi.values),
            harmonic_trap, gp_ground.d, two_body.g_bcs,
        )
        numeric = (plus - minus) / (2.0 * eps)
        analytic = 2.0 * grad.dot(phi)
        assert abs(numeric - analytic) < 1e-6 * max(1.0, abs(analytic))


def test_quartic_scaling_in_t(gp_ground, harmonic_trap, two_body):
    # E(sqrt(t) psi) = a t + b t^2 exactly for the discrete functional
    grid = gp_ground.psi.grid
    psi = gp_ground.psi

    def e_at(t):
        scaled = bg.RadialFunction(grid, np.sqrt(t) * psi.values)
        return gp.gp_energy(scaled, harmonic_trap, gp_ground.d, two_body.g_bcs)

    e1, e2 = e_at(1.0), e_at(2.0)
    b = (e2 - 2.0 * e1) / 2.0
    a = e1 - b
    for t in (0.5, 3.0, 7.5):
        assert abs(e_at(t) - (a * t + b * t**2)) < 1e-12 * max(1.0, abs(e_at(t)))


def test_constrained_minimizer(two_body, harmonic_trap, macro_grid):
    res = gp.minimize_gp_constrained(harmonic_trap, two_body.g_bcs, 0.05, macro_grid)
    assert res.converged
    assert abs(res.f0.norm() - 1.0) < 1e-10
    # multiplier identity: mu0 = energy + g N ||f0||_4^4 (discrete norms)
    u = macro_grid.nodes * res.f0.values
    quart = two_body.g_bcs * 0.05 * 4.0 * np.pi * macro_grid.dr * float(
        np.sum(u**4 / macro_grid.nodes**2)
    )
    assert abs(res.mu0 - (res.energy + quart)) < 1e-10
    with pytest.raises(ConfigurationError):
        gp.minimize_gp_constrained(harmonic_trap, two_body.g_bcs, -1.0, macro_grid)


def test_gl_split_identity(gp_ground):
    split = gp.gl_split(gp_ground)
    assert split.identity_residual < 1e-10
    assert split.e_ring >= 0.0
    assert split.shell.converged
    # the shell multiplier at the minimizer mass equals the offset D
    assert abs(split.shell.mu0 - gp_ground.d) < 1e-6


def test_gl_split_zero_mass_raises(two_body, harmonic_trap, macro_grid):
    res = gp.minimize_gp_unconstrained(harmonic_trap, 1.4, two_body.g_bcs, macro_grid)
    with pytest.raises(ConfigurationError):
        gp.gl_split(res, harmonic_trap)


def test_domain_error_for_undecayed_field(harmonic_trap, macro_grid):
    flat = bg.RadialFunction(macro_grid, np.ones(macro_grid.n))
    with pytest.raises(gp.DomainError):
        gp.gp_energy(flat, harmonic_trap, 2.0, 1.0)


def test_apriori_bounds(gp_ground):
    report = gp.apriori_bounds_check(gp_ground)
    assert report["all_ok"]
    assert report["a0"] > 0.0
