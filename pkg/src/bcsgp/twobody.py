"""Two-body relative problem: bound pair wavefunction and derived constants.

The relative Hamiltonian is -Delta + V with a single negative eigenvalue -E0
(E0 > 0) and normalized radial ground state alpha0.  Everything downstream
(pair kernels, the quartic coupling of the effective energy functional)
derives from this eigenpair.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .grids import (
    ConfigurationError,
    RadialFunction,
    RadialGrid,
    ResolutionWarning,
    TailWarning,
    _potential_values,
    _tridiag,
    build_radial_grid,
    find_root_scalar,
    radial_eigensolve,
    radial_fourier,
)
from .model import GaussianWell


class NoBoundStateError(RuntimeError):
    """The interaction has no negative-energy s-wave bound state."""


class GapViolatedError(RuntimeError):
    """The strengthened spectral gap condition fails (gap <= 0)."""

    def __init__(self, msg, gap=None, ell=None):
        super().__init__(msg)
        self.gap = gap
        self.ell = ell


@dataclass
class TwoBodySolution:
    """Ground state data of -Delta + V and derived quantities.

    alpha0 is L^2(R^3)-normalized and nonnegative; halpha0 holds the exact
    image (-Delta + E0) alpha0 = -V alpha0, which is smooth even where the
    numerical Laplacian of alpha0 would be noisy.
    """

    interaction: object
    grid: RadialGrid
    e0: float
    alpha0: RadialFunction
    halpha0: RadialFunction
    e0_disc: float | None = None  # eigenvalue of alpha0 on its own grid
    alpha0_hat: RadialFunction | None = None
    g_bcs: float | None = None
    gap: float | None = None
    gap_epsilon: float | None = None
    decay_rate: float | None = None
    moments: dict = field(default_factory=dict)


def solve_ground_state(interaction, grid: RadialGrid, refine: bool = True) -> TwoBodySolution:
    """Lowest s-wave eigenpair of -Delta + V; raises if it is not bound.

    The reported e0 is Richardson refined (accuracy-facing); e0_disc keeps
    the eigenvalue of the stored profile on its own grid, which downstream
    quadratic forms pair with alpha0 so eigenfunction identities hold to
    solver precision instead of discretization order.
    """
    (energy_disc, f), = radial_eigensolve(interaction, 1.0, 0, grid, k=1, refine=False)
    energy = energy_disc
    if refine:
        (energy, _), = radial_eigensolve(interaction, 1.0, 0, grid, k=1, refine=True)
    if energy >= 0.0:
        raise NoBoundStateError(f"lowest s-wave level {energy:.6g} is not negative")
    e0 = -energy
    v = _potential_values(interaction, grid)
    halpha0 = RadialFunction(grid, -v * f.values, name="halpha0")
    if f.tail_ratio() > 1e-8:
        warnings.warn("bound state barely decayed at r_max; enlarge the grid", TailWarning)
    return TwoBodySolution(interaction, grid, e0, f, halpha0, e0_disc=-energy_disc)


def compute_spectral_gap(sol: TwoBodySolution, epsilon: float = 0.5, ell_max: int = 4) -> float:
    """Gap of (1-epsilon)(-Delta) + V + E0 on the complement of alpha0.

    In the s-wave sector the operator is restricted to the orthogonal
    complement of alpha0 (not its own ground state once epsilon > 0), so the
    lowest eigenvalue there is found from the secular equation
    sum_k c_k^2 / (lambda_k - x) = 0 between the two lowest unrestricted
    levels.  Sectors ell >= 1 need no projection.  Raises GapViolatedError
    when the minimum over sectors is not positive.
    """
    if not (0.0 < epsilon < 1.0):
        raise ConfigurationError("epsilon must lie in (0, 1)")
    grid, dr = sol.grid, sol.grid.dr
    v = _potential_values(sol.interaction, grid) + sol.e0
    kf = 1.0 - epsilon
    gaps = {}
    for ell in range(ell_max + 1):
        v_eff = v + kf * ell * (ell + 1) / grid.nodes**2
        d, e = _tridiag(v_eff, kf, dr)
        if ell == 0:
            lam, vecs = eigh_tridiagonal(d, e)
            u0 = sol.alpha0.values * grid.nodes
            u0 /= np.linalg.norm(u0)
            c = vecs.T @ u0
            secular = lambda x: np.sum(c**2 / (lam - x))
            lo = lam[0] + 1e-9 * max(1.0, abs(lam[0]))
            hi = lam[1] - 1e-9 * max(1.0, abs(lam[1]))
            gaps[ell] = find_root_scalar(secular, (lo, hi))
        else:
            gaps[ell] = float(
                eigh_tridiagonal(d, e, select="i", select_range=(0, 0), eigvals_only=True)[0]
            )
    gap = min(gaps.values())
    if gap <= 0.0:
        worst = min(gaps, key=gaps.get)
        raise GapViolatedError(
            f"spectral gap {gap:.6g} <= 0 in sector ell={worst}", gap=gap, ell=worst
        )
    sol.gap = gap
    sol.gap_epsilon = epsilon
    return gap


def fit_decay_rate(f: RadialFunction, window: tuple = (0.5, 0.8)) -> float:
    """Exponential decay rate b of the tail f(r) ~ C e^{-b r} / r.

    Fits log(r |f|) linearly over the window (fractions of r_max), inside the
    region where the Dirichlet boundary has not yet bent the tail.
    """
    r = f.grid.nodes
    lo, hi = window[0] * f.grid.r_max, window[1] * f.grid.r_max
    mask = (r >= lo) & (r <= hi) & (np.abs(f.values) > 1e-300)
    if np.count_nonzero(mask) < 8:
        warnings.warn("too few tail nodes for a decay fit", ResolutionWarning)
        return float("nan")
    y = np.log(r[mask] * np.abs(f.values[mask]))
    slope, _ = np.polyfit(r[mask], y, 1)
    return float(-slope)


def compute_g_bcs(sol: TwoBodySolution, p_max: float = 30.0, n_p: int = 1500) -> float:
    """Quartic pairing coupling (2 pi)^3 int (p^2 + E0) |alpha0_hat(p)|^4 d^3p."""
    p_grid = build_radial_grid(p_max, n_p, "uniform")
    ahat = radial_fourier(sol.alpha0, p_grid)
    p = p_grid.nodes
    g = (2.0 * np.pi) ** 3 * 4.0 * np.pi * float(p_grid.integrate((p**2 + sol.e0) * ahat.values**4))
    if abs(ahat.values[-1]) > 1e-8 * np.max(np.abs(ahat.values)):
        warnings.warn("momentum grid truncates alpha0_hat; increase p_max", ResolutionWarning)
    sol.alpha0_hat = ahat
    sol.g_bcs = g
    return g


def alpha0_diagnostics(sol: TwoBodySolution) -> dict:
    """Integrability and regularity report for the bound pair state."""
    g, a = sol.grid, sol.alpha0.values
    r = g.nodes
    v = _potential_values(sol.interaction, g)
    m = {
        "l2_sq": sol.alpha0.norm_sq(),
        "l1": 4.0 * np.pi * float(g.integrate(np.abs(a))),
        "r_l2_sq": 4.0 * np.pi * float(g.integrate((r * a) ** 2)),
        "r2_mean": 4.0 * np.pi * float(g.integrate(r**2 * a**2)),
        "v_alpha_l1": 4.0 * np.pi * float(g.integrate(np.abs(v) * a**2)),
        "grad_l2_sq": sol.e0 + 4.0 * np.pi * float(g.integrate(-v * a**2)),
        "sup": float(np.max(np.abs(a))),
    }
    sol.decay_rate = fit_decay_rate(sol.alpha0)
    m["decay_rate"] = sol.decay_rate
    m["decay_rate_expected"] = float(np.sqrt(sol.e0))
    if sol.alpha0_hat is not None:
        ph, ah = sol.alpha0_hat.grid, sol.alpha0_hat.values
        m["hat_l2_sq"] = sol.alpha0_hat.norm_sq()
        m["hat_l4_4"] = 4.0 * np.pi * float(ph.integrate(ah**4))
    sol.moments = m
    return m


def tune_gaussian_well(
    target_e0: float,
    grid: RadialGrid,
    width: float = 1.0,
    depth_bracket: tuple = (0.5, 60.0),
) -> GaussianWell:
    """Depth of a Gaussian well whose s-wave binding energy equals target_e0."""

    def mismatch(depth):
        pairs = radial_eigensolve(GaussianWell(depth, width), 1.0, 0, grid, k=1, refine=True)
        return pairs[0][0] + target_e0

    depth = find_root_scalar(mismatch, depth_bracket, tol=1e-12)
    return GaussianWell(depth, width)


def solve_two_body(
    interaction=None,
    n: int = 3600,
    r_max: float = 18.0,
    epsilon: float = 0.5,
    ell_max: int = 4,
    p_max: float = 30.0,
    n_p: int = 1500,
    refine: bool = True,
) -> TwoBodySolution:
    """Full two-body pipeline: ground state, spectral gap, coupling, diagnostics.

    With interaction=None a Gaussian well tuned to binding energy E0 = 1 is
    used (the package default model).
    """
    grid = build_radial_grid(r_max, n, "uniform")
    if interaction is None:
        interaction = tune_gaussian_well(1.0, grid)
    sol = solve_ground_state(interaction, grid, refine=refine)
    compute_spectral_gap(sol, epsilon=epsilon, ell_max=ell_max)
    compute_g_bcs(sol, p_max=p_max, n_p=n_p)
    alpha0_diagnostics(sol)
    return sol
