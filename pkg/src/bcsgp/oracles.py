"""Closed-form reference values for validating the numerical pipeline.

Three families:
  * square well: transcendental s-wave binding energy,
  * harmonic trap: exact ground energy and Gaussian profile,
  * all-Gaussian pair kernel: every quantity the package computes
    numerically (norms, s1, quartic coupling, 12-dimensional operator
    traces) has an elementary closed form via Gaussian moment algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import NoSignChangeError, find_root_scalar


def square_well_binding(depth: float, radius: float = 1.0) -> float | None:
    """s-wave binding energy E0 > 0 of -depth * 1_{r<radius}, or None if unbound."""
    if depth * radius**2 <= (np.pi / 2.0) ** 2:
        return None

    def match(e):
        k = np.sqrt(depth - e)
        return k / np.tan(k * radius) + np.sqrt(e)

    lo, hi = 1e-12 * depth, depth * (1.0 - 1e-12)
    # keep the bracket inside the first branch of cot(k radius)
    k_hi = np.pi / radius * (1.0 - 1e-12)
    lo = max(lo, depth - k_hi**2)
    try:
        return find_root_scalar(match, (lo, hi))
    except NoSignChangeError:
        return None


def harmonic_ground(kinetic_factor: float, coefficient: float) -> tuple:
    """Ground energy and Gaussian rate of -a Delta + b r^2.

    Returns (E, beta) with E = 3 sqrt(a b) and ground state proportional to
    exp(-beta r^2 / 2), beta = sqrt(b / a).
    """
    return 3.0 * np.sqrt(kinetic_factor * coefficient), np.sqrt(coefficient / kinetic_factor)


@dataclass(frozen=True)
class GaussianCase:
    """All-Gaussian pair kernel: psi = A exp(-gp r^2), alpha0 = c0 exp(-g0 r^2).

    c0 normalizes alpha0 in L^2(R^3); e0 is the nominal binding energy
    attached to alpha0, and the trap is w_coeff * r^2.
    """

    amplitude: float = 0.7
    gamma_psi: float = 0.5
    gamma_0: float = 0.5
    e0: float = 0.5
    h: float = 0.4
    d: float = 1.0
    w_coeff: float = 1.0

    @property
    def c0(self) -> float:
        return (2.0 * self.gamma_0 / np.pi) ** 0.75

    def psi(self, r):
        return self.amplitude * np.exp(-self.gamma_psi * np.asarray(r) ** 2)

    def alpha0(self, r):
        return self.c0 * np.exp(-self.gamma_0 * np.asarray(r) ** 2)

    def psi_laplacian(self, r):
        r = np.asarray(r, dtype=float)
        return (4.0 * self.gamma_psi**2 * r**2 - 6.0 * self.gamma_psi) * self.psi(r)

    def trap(self, r):
        return self.w_coeff * np.asarray(r) ** 2


def gaussian_norms(case: GaussianCase) -> dict:
    """L^2 / L^4 / gradient norms of the two Gaussian profiles."""
    a, gp, g0 = case.amplitude, case.gamma_psi, case.gamma_0
    psi_l2 = a**2 * (np.pi / (2.0 * gp)) ** 1.5
    return {
        "psi_l2_sq": psi_l2,
        "psi_l4_4": a**4 * (np.pi / (4.0 * gp)) ** 1.5,
        "psi_grad_sq": 3.0 * gp * psi_l2,
        "psi_r2": 1.5 / (2.0 * gp) * psi_l2,
        "alpha0_l2_sq": 1.0,
        "alpha0_r2": 0.75 / g0,
        "hs_norm_sq": psi_l2 / case.h,
    }


def gaussian_g_bcs(case: GaussianCase) -> float:
    """(2 pi)^3 int (p^2 + e0) |alpha0_hat|^4 d^3p in closed form."""
    g0, e0 = case.gamma_0, case.e0
    return float(
        (2.0 * np.pi) ** 3
        * case.c0**4
        * (2.0 * g0) ** -6
        * (np.pi * g0) ** 1.5
        * (e0 + 1.5 * g0)
    )


def gaussian_s1(case: GaussianCase) -> float:
    """Top singular value of the Gaussian pair kernel (Mehler kernel form)."""
    p = case.gamma_psi / 4.0 + case.gamma_0 / case.h**2
    q = case.gamma_psi / 4.0 - case.gamma_0 / case.h**2
    omega = np.sqrt(p**2 - q**2)
    return float(case.amplitude * case.c0 / case.h**2 * (np.pi / (p + omega)) ** 1.5)


def gaussian_quadratic(case: GaussianCase) -> dict:
    """Closed forms for the quadratic energy terms of the Gaussian kernel."""
    n = gaussian_norms(case)
    h = case.h
    # <alpha0, (-Delta + e0) alpha0> = 6 g0 + e0 - 4 g0^2 <r^2>_alpha0
    rel = n["psi_l2_sq"] / h * (
        6.0 * case.gamma_0 + case.e0 - 4.0 * case.gamma_0**2 * n["alpha0_r2"]
    )
    w_term = case.w_coeff * (h * n["psi_r2"] + 0.25 * h**3 * n["psi_l2_sq"] * n["alpha0_r2"])
    return {
        "com_kinetic": 0.25 * h * n["psi_grad_sq"],
        "rel_residual": rel,
        "w_term": w_term,
        "d_term": -case.d * h * n["psi_l2_sq"],
    }


def _quartic_qmatrix(case: GaussianCase):
    gp, g0, h = case.gamma_psi, case.gamma_0, case.h
    s = np.array([0.0, 0.25, 0.5, 0.25])
    t = np.array([0.0, -0.25, 0.0, 0.25])
    e1 = np.array([0.0, 1.0, 0.0, 0.0])
    e2 = np.array([0.0, 0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, 0.0, 1.0])
    ex = np.array([1.0, 0.0, 0.0, 0.0])
    q = 4.0 * gp * np.outer(ex, ex)
    q += 2.0 * gp * h**2 * (np.outer(s, s) + np.outer(t, t))
    for e in (e1, e2, e3):
        q += g0 * np.outer(e, e)
    esum = e1 + e2 + e3
    q += g0 * np.outer(esum, esum)
    return q


def gaussian_quartic_traces(case: GaussianCase) -> dict:
    """Reduced 12-dimensional quartic integrals and the assembled traces.

    The four-point cycle separates into three identical 4x4 Gaussian blocks
    in (X, xi1, xi2, xi3) coordinates, so every integral is a Gaussian
    moment: partition function times a quadratic expectation.
    """
    gp, g0, h, e0 = case.gamma_psi, case.gamma_0, case.h, case.e0
    q = _quartic_qmatrix(case)
    det = np.linalg.det(q)
    z12 = (np.pi**2 / np.sqrt(det)) ** 3 * case.amplitude**4 * case.c0**4
    sigma = np.linalg.inv(q) / 2.0
    xi1_sq = 3.0 * sigma[1, 1]
    a_vec = np.array([1.0, h / 4.0, 0.0, -h / 4.0])  # point X - h t
    b_vec = np.array([1.0, -3.0 * h / 4.0, -h / 2.0, -h / 4.0])  # point x1 = X - h q
    i_a = z12 * (6.0 * g0 + e0 - 4.0 * g0**2 * xi1_sq)
    i_b = z12 * (4.0 * gp**2 * 3.0 * float(a_vec @ sigma @ a_vec) - 6.0 * gp)
    i_c = z12 * case.w_coeff * 3.0 * float(b_vec @ sigma @ b_vec)
    i_d = z12
    tr_rel = h * i_a - 0.25 * h**3 * i_b
    tr_w = h**3 * i_c
    return {
        "i_a": i_a,
        "i_b": i_b,
        "i_c": i_c,
        "i_d": i_d,
        "tr_rel": tr_rel,
        "tr_w": tr_w,
        "tr_hbar": tr_rel + tr_w - case.d * h**3 * i_d,
        "s4_4": h * i_d,
    }


@dataclass(frozen=True)
class OracleCase:
    """One frozen reference value with the inputs that reproduce it."""

    name: str
    inputs: dict
    expected: dict
    tolerance: float


def oracle_table() -> list:
    """Frozen reference values used by the validation suite and `verify`."""
    default = GaussianCase()
    cases = [
        OracleCase(
            "square_well_binding",
            {"depth": 4.0, "radius": 1.0},
            {"e0": square_well_binding(4.0, 1.0)},
            1e-10,
        ),
        OracleCase(
            "harmonic_trap_ground",
            {"kinetic_factor": 0.25, "coefficient": 1.0},
            {"energy": 1.5, "rate": 2.0},
            1e-12,
        ),
        OracleCase(
            "gaussian_reference_g_bcs",
            {"gamma_0": 0.5, "e0": 0.5},
            {"g_bcs": 19.687012432153026},
            1e-12,
        ),
        OracleCase(
            "gaussian_s1",
            {"case": "default"},
            {"s1": gaussian_s1(default)},
            1e-12,
        ),
        OracleCase(
            "gaussian_quartic_traces",
            {"case": "default"},
            gaussian_quartic_traces(default),
            1e-12,
        ),
    ]
    return cases
