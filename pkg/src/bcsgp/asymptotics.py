"""Scale sweeps, power-law fits and the critical coupling estimate.

The microscopic trial energy should approach h times the macroscopic energy
as the scale ratio h shrinks; sweeping h at a fixed macroscopic problem
exposes the rate.  The critical offset D_c (where the minimizer turns on)
is located by bisection on the sign of the trial energy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .gp import GPResult, minimize_gp_unconstrained
from .grids import ConfigurationError, RadialGrid
from .pairing import (
    EnergyBreakdown,
    build_pair_kernel,
    make_trial_state,
    top_singular_value,
    trial_bcs_energy,
)
from .twobody import TwoBodySolution


class DegenerateFitError(RuntimeError):
    """Too few statistically significant points to fit a power law."""


@dataclass
class PowerLawFit:
    """Least-squares fit value = prefactor * x^exponent in log-log variables."""

    exponent: float
    prefactor: float
    r_squared: float
    n_used: int
    excluded: list


def fit_power_law(x, values, stderrs=None, min_points: int = 4) -> PowerLawFit:
    """Fit |values| ~ C x^p, dropping points indistinguishable from zero.

    A point is kept only when |value| > 3 * stderr, so Monte Carlo noise at
    the smallest scales cannot fake a rate.  Raises DegenerateFitError with
    fewer than min_points significant points.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(values, dtype=float)
    s = np.zeros_like(v) if stderrs is None else np.asarray(stderrs, dtype=float)
    keep = (np.abs(v) > 3.0 * s) & (np.abs(v) > 0.0) & (x > 0.0)
    excluded = [float(xx) for xx in x[~keep]]
    if np.count_nonzero(keep) < min_points:
        raise DegenerateFitError(
            f"only {np.count_nonzero(keep)} significant points, need {min_points}"
        )
    lx, lv = np.log(x[keep]), np.log(np.abs(v[keep]))
    slope, intercept = np.polyfit(lx, lv, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - np.mean(lv)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(np.exp(intercept)), r2, int(np.count_nonzero(keep)), excluded)


def _el_laplacian(gp_result: GPResult):
    """Laplacian of the minimizer from its Euler-Lagrange equation (smooth)."""
    trap, d, g = gp_result.trap, gp_result.d, gp_result.g_bcs
    psi = gp_result.psi

    def lap(r):
        p = psi(r)
        return 4.0 * ((trap(r) - d) * p + 2.0 * g * p**3)

    return lap


def evaluate_trial_energy(
    sol: TwoBodySolution,
    gp_result: GPResult,
    h: float,
    samples: int = 2_000_000,
    seed: int = 0,
    batch: int = 500_000,
) -> EnergyBreakdown:
    """Microscopic trial energy of the macroscopic minimizer at scale h."""
    kernel = build_pair_kernel(
        gp_result.psi, sol, h, psi_laplacian=_el_laplacian(gp_result)
    )
    trial = make_trial_state(kernel)
    return trial_bcs_energy(
        trial, gp_result.trap, gp_result.d, samples=samples, seed=seed, batch=batch
    )


@dataclass
class SweepRecord:
    """One scale sweep at fixed macroscopic data."""

    h_values: np.ndarray
    d: float
    g_bcs: float
    gp_energy: float
    breakdowns: list
    residuals: np.ndarray  # E_trial / h - E_gp
    residual_stderrs: np.ndarray
    lambdas: np.ndarray
    s1_values: np.ndarray
    fit: PowerLawFit | None


def h_sweep(
    sol: TwoBodySolution,
    gp_result: GPResult,
    h_values,
    samples: int = 2_000_000,
    seed: int = 0,
    batch: int = 500_000,
    fit: bool = True,
) -> SweepRecord:
    """Sweep the scale ratio and record the per-scale energy mismatch.

    The macroscopic minimizer does not depend on h, so it is computed once;
    each scale gets an independent, deterministic Monte Carlo stream spawned
    from the master seed in sweep order.
    """
    h_values = np.asarray(sorted(h_values, reverse=True), dtype=float)
    child_seeds = np.random.SeedSequence(seed).generate_state(len(h_values))
    breakdowns, res, errs, lams, s1s = [], [], [], [], []
    for h, child in zip(h_values, child_seeds):
        bd = evaluate_trial_energy(
            sol, gp_result, float(h), samples=samples, seed=int(child), batch=batch
        )
        breakdowns.append(bd)
        res.append(bd.total / h - gp_result.energy)
        errs.append(bd.total_stderr / h)
        lams.append(bd.lam)
        s1s.append(bd.s1)
    fit_result = None
    if fit:
        try:
            fit_result = fit_power_law(h_values, res, errs)
        except DegenerateFitError as exc:
            warnings.warn(f"no power-law fit: {exc}", UserWarning)
    return SweepRecord(
        h_values, gp_result.d, gp_result.g_bcs, gp_result.energy,
        breakdowns, np.asarray(res), np.asarray(errs),
        np.asarray(lams), np.asarray(s1s), fit_result,
    )


@dataclass
class CriticalPoint:
    """Bisection estimate of the offset where pairing becomes favorable."""

    h: float
    d_c: float
    bracket: tuple
    e_w: float
    uncertainty: float
    mu_c: float  # chemical potential -E0 + D_c h^2


def estimate_mu_c(
    sol: TwoBodySolution,
    trap,
    grid: RadialGrid,
    h: float,
    bracket: tuple,
    samples: int = 1_000_000,
    seed: int = 0,
    tol: float = 1e-3,
    g_bcs: float | None = None,
) -> CriticalPoint:
    """Critical offset D_c at scale h by bisection on the trial energy sign.

    Below its threshold the macroscopic minimizer is identically zero and
    the trial energy vanishes, so the bisection treats "strictly negative
    beyond Monte Carlo noise" as the superfluid side.  The returned
    uncertainty propagates the Monte Carlo error through the local slope of
    the energy across the final bracket.
    """
    from .twobody import compute_g_bcs

    if g_bcs is None:
        g_bcs = sol.g_bcs if sol.g_bcs is not None else compute_g_bcs(sol)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ConfigurationError("bracket must satisfy lo < hi")
    ss = np.random.SeedSequence(seed)

    def energy_at(d, child_seed):
        gp_result = minimize_gp_unconstrained(trap, d, g_bcs, grid)
        if gp_result.mass == 0.0:
            return 0.0, 0.0, gp_result.e_w
        bd = evaluate_trial_energy(sol, gp_result, h, samples=samples, seed=child_seed)
        return bd.total, bd.total_stderr, gp_result.e_w

    e_lo, s_lo, e_w = energy_at(lo, seed)
    e_hi, s_hi, _ = energy_at(hi, seed + 1)
    if e_lo - 2.0 * s_lo < 0.0:
        raise ConfigurationError("bracket low end is already superfluid")
    if e_hi + 2.0 * s_hi >= 0.0:
        raise ConfigurationError("bracket high end is not superfluid")
    k = 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        e_mid, s_mid, _ = energy_at(mid, seed + k)
        k += 1
        if e_mid + 2.0 * s_mid < 0.0:
            hi, e_hi, s_hi = mid, e_mid, s_mid
        else:
            lo, e_lo, s_lo = mid, e_mid, s_mid
    d_c = 0.5 * (lo + hi)
    slope = abs(e_hi - e_lo) / max(hi - lo, 1e-300)
    stderr = max(s_lo, s_hi)
    uncertainty = stderr / slope if slope > 0 else float("inf")
    return CriticalPoint(
        h, d_c, (lo, hi), e_w, uncertainty, -sol.e0 + d_c * h**2
    )
