"""Pair kernels, admissible trial states and the microscopic pairing energy.

A pair kernel is the two-scale product

    alpha(x, y) = h^{-2} psi((x+y)/2) alpha0((x-y)/h)  [+ remainder],

with psi a macroscopic field and alpha0 the normalized bound pair state.
The one-body density matrix of the trial state is

    gamma = alpha*conj(alpha) + (1 + lambda h) (alpha*conj(alpha))^2,

admissible (0 <= gamma <= 1 with the pairing constraint) when lambda is
chosen against the top singular value of alpha.  The microscopic energy
splits into a quadratic part, evaluated by deterministic quadrature, and
quartic operator traces, evaluated by Monte Carlo in 12 dimensions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import eval_legendre, roots_legendre

from .grids import (
    ConfigurationError,
    RadialFunction,
    ResolutionWarning,
    apply_radial_operator,
    _potential_values,
)
from .twobody import TwoBodySolution


class InadmissibleStateError(RuntimeError):
    """No admissible lambda exists below the cap for this pair kernel."""


class VarianceWarning(UserWarning):
    """A Monte Carlo estimate has large relative standard error."""


@dataclass
class Remainder:
    """Correction to the product kernel: h^{-2} chi((x+y)/2) rho((x-y)/h).

    chi lives on the macroscopic grid, rho on the relative grid.  rho is
    typically L^2-orthogonal to alpha0 but does not have to be.
    """

    chi: RadialFunction
    rho: RadialFunction


@dataclass
class PairKernel:
    """Two-scale pair wavefunction built from a macro field and alpha0."""

    psi: RadialFunction
    sol: TwoBodySolution
    h: float
    remainder: Remainder | None = None
    psi_laplacian: object = None  # callable r -> (Delta psi)(r); spline fallback

    @property
    def alpha0(self) -> RadialFunction:
        return self.sol.alpha0

    def hs_norm_sq(self) -> float:
        """Hilbert-Schmidt norm squared, exact under the scaling identity."""
        a0 = self.alpha0.norm_sq()
        total = self.psi.norm_sq() * a0
        if self.remainder is not None:
            chi, rho = self.remainder.chi, self.remainder.rho
            total += 2.0 * self.psi.dot(chi) * self.alpha0.dot(rho) + chi.norm_sq() * rho.norm_sq()
        return total / self.h

    def laplacian_psi(self, r):
        if self.psi_laplacian is not None:
            return self.psi_laplacian(r)
        s = self.psi._spline
        r = np.asarray(r, dtype=float)
        safe = np.where(r == 0.0, 1.0, r)
        out = s(r, 2) + 2.0 * s(r, 1) / safe
        return np.where(r <= self.psi.grid.r_max, out, 0.0)

    def values(self, center_r, relative_r):
        """Kernel values as a function of |x+y|/2 and |x-y|."""
        out = self.psi(center_r) * self.alpha0(np.asarray(relative_r) / self.h)
        if self.remainder is not None:
            out = out + self.remainder.chi(center_r) * self.remainder.rho(
                np.asarray(relative_r) / self.h
            )
        return out / self.h**2


def build_pair_kernel(
    psi: RadialFunction,
    sol: TwoBodySolution,
    h: float,
    remainder: Remainder | None = None,
    psi_laplacian=None,
) -> PairKernel:
    """Assemble a pair kernel, checking that the two scales are resolvable."""
    if not (0.0 < h < 1.0):
        raise ConfigurationError(f"scale ratio h must lie in (0, 1), got {h}")
    if psi.grid.dr is not None and h < 4.0 * psi.grid.dr:
        warnings.warn(
            f"h = {h} is below 4 macroscopic grid spacings; "
            "operator quadratures cannot resolve the relative scale",
            ResolutionWarning,
        )
    return PairKernel(psi, sol, h, remainder, psi_laplacian)


def _angular_kernel_matrix(kernel: PairKernel, r, w, c, wc, ell: int = 0) -> np.ndarray:
    """Symmetrized matrix of the kernel in angular sector ell on GL radial nodes."""
    ri = r[:, None, None]
    rj = r[None, :, None]
    cc = c[None, None, :]
    center = 0.5 * np.sqrt(np.maximum(ri**2 + rj**2 + 2.0 * ri * rj * cc, 0.0))
    relative = np.sqrt(np.maximum(ri**2 + rj**2 - 2.0 * ri * rj * cc, 0.0))
    vals = kernel.values(center, relative)
    proj = 0.5 * (vals * eval_legendre(ell, c)[None, None, :]) @ wc
    m = np.sqrt(4.0 * np.pi * w * r**2)
    return m[:, None] * proj * m[None, :]


def _gl_nodes(a: float, b: float, n: int):
    x, w = roots_legendre(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def top_singular_value(
    kernel: PairKernel,
    n_r: int = 240,
    n_c: int = 48,
    r_max: float | None = None,
    max_iter: int = 2000,
    tol: float = 1e-12,
) -> float:
    """Largest singular value of the pair kernel as an operator on L^2(R^3).

    For nonnegative psi and alpha0 the top singular pair is isotropic, so it
    suffices to diagonalize the spherically averaged kernel.  Power iteration
    with a Rayleigh residual stopping rule; falls back to a dense
    diagonalization (with a warning) if the iteration stagnates.
    """
    r_max = r_max if r_max is not None else kernel.psi.grid.r_max
    r, w = _gl_nodes(0.0, r_max, n_r)
    c, wc = _gl_nodes(-1.0, 1.0, n_c)
    b = _angular_kernel_matrix(kernel, r, w, c, wc, ell=0)
    x = np.sqrt(w * r**2)
    x /= np.linalg.norm(x)
    s1 = 0.0
    for _ in range(max_iter):
        y = b @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        s1 = float(x @ (b @ x))
        if np.linalg.norm(b @ x - s1 * x) <= tol * max(1.0, abs(s1)):
            return abs(s1)
    warnings.warn("power iteration stagnated; using dense diagonalization", ResolutionWarning)
    ev = np.linalg.eigvalsh(b)
    return float(np.max(np.abs(ev)))


def schatten_norms(
    kernel: PairKernel,
    orders=(4, 6),
    ell_max: int = 12,
    n_r: int = 200,
    n_c: int | None = None,
    r_max: float | None = None,
) -> dict:
    """Schatten norms ||alpha||_{S^p}^p summed over angular sectors.

    The spherical truncation error is controlled through the S^2 deficit:
    the exact Hilbert-Schmidt norm is known in closed form, so the omitted
    sectors carry at most deficit^{p/2} for each even order p.
    """
    r_max = r_max if r_max is not None else kernel.psi.grid.r_max
    n_c = n_c if n_c is not None else 2 * ell_max + 24
    r, w = _gl_nodes(0.0, r_max, n_r)
    c, wc = _gl_nodes(-1.0, 1.0, n_c)
    out = {p: 0.0 for p in orders}
    s2_grid = 0.0
    for ell in range(ell_max + 1):
        b = _angular_kernel_matrix(kernel, r, w, c, wc, ell=ell)
        ev = np.linalg.eigvalsh(b)
        s2_grid += (2 * ell + 1) * float(np.sum(ev**2))
        for p in orders:
            out[p] += (2 * ell + 1) * float(np.sum(np.abs(ev) ** p))
    s2_exact = kernel.hs_norm_sq()
    deficit = max(s2_exact - s2_grid, 0.0)
    report = {f"s{p}_{p}": out[p] for p in orders}
    report["s2_sq"] = s2_grid
    report["s2_sq_exact"] = s2_exact
    report["s2_deficit"] = deficit
    for p in orders:
        report[f"s{p}_{p}_tail_bound"] = deficit ** (p / 2)
    return report


def admissibility_polynomial(lam: float, h: float, s_sq: float) -> float:
    """Margin of 0 <= gamma <= 1 - gamma at a squared singular value s_sq."""
    c = 1.0 + lam * h
    return lam * h - 2.0 * c * s_sq - c**2 * s_sq**2


@dataclass
class TrialState:
    """Admissible pairing trial state gamma = T + (1 + lambda h) T^2, T = alpha*conj(alpha)."""

    kernel: PairKernel
    s1: float
    lam: float
    margin: float


def make_trial_state(
    kernel: PairKernel,
    margin: float = 1e-9,
    lambda_cap: float = 1e6,
    s1: float | None = None,
) -> TrialState:
    """Smallest lambda making the trial state admissible with the given margin.

    The admissibility polynomial is decreasing in the squared singular value,
    so it is enough to enforce it at s1^2.  Raises InadmissibleStateError if
    no lambda <= lambda_cap works (s1 too large for this construction).
    """
    if s1 is None:
        s1 = top_singular_value(kernel)
    s_sq = s1**2
    h = kernel.h
    if s_sq == 0.0:
        return TrialState(kernel, 0.0, 0.0, margin)

    def gap(lam):
        return admissibility_polynomial(lam, h, s_sq) - margin

    # the polynomial in lam is concave; its peak bounds the search interval
    peak_c = (1.0 - 2.0 * s_sq) / (2.0 * s_sq**2)
    if peak_c <= 1.0 or gap((peak_c - 1.0) / h) < 0.0:
        raise InadmissibleStateError(
            f"no admissible lambda exists for s1 = {s1:.6g} at h = {h}"
        )
    lam_hi = min((peak_c - 1.0) / h, lambda_cap)
    if gap(lam_hi) < 0.0:
        raise InadmissibleStateError(
            f"admissible lambda exceeds the cap {lambda_cap:g} for s1 = {s1:.6g}"
        )
    from .grids import find_root_scalar

    lam = find_root_scalar(gap, (0.0, lam_hi))
    return TrialState(kernel, s1, lam, margin)


@dataclass
class QuadraticTerms:
    """Deterministic part of the energy: tr hbar*T + pair interaction term."""

    com_kinetic: float
    rel_residual: float
    w_term: float
    d_term: float

    @property
    def total(self) -> float:
        return self.com_kinetic + self.rel_residual + self.w_term + self.d_term


def _binding_form(fa: RadialFunction, fb: RadialFunction, v_vals: np.ndarray, e0: float) -> float:
    """Quadratic form <fa, (-Delta + V + E0) fb> on the relative grid."""
    g = fa.grid
    ua = g.nodes * fa.values
    ub = g.nodes * fb.values
    hub = apply_radial_operator(ub, v_vals + e0, 1.0, g.dr)
    return 4.0 * np.pi * g.dr * float(ua @ hub)


def _grad_sq(f: RadialFunction) -> float:
    """||grad f||^2 for a radial function via the Dirichlet edge sum in u = r f."""
    u = f.grid.nodes * f.values
    du = np.diff(u, prepend=0.0, append=0.0)
    return 4.0 * np.pi * float(np.sum(du**2)) / f.grid.dr


def _w_pair_quad(trap, h, fa, fb, ga, gb, n_eta=200, n_xi=200, n_c=32) -> float:
    """h * (4 pi)(2 pi) int fa fb (eta) ga gb (xi) W(|eta + h xi/2|) reduced quadrature."""
    eta, weta = _gl_nodes(0.0, fa.grid.r_max, n_eta)
    xi, wxi = _gl_nodes(0.0, ga.grid.r_max, n_xi)
    c, wc = _gl_nodes(-1.0, 1.0, n_c)
    macro = fa(eta) * fb(eta) * eta**2 * weta
    micro = ga(xi) * gb(xi) * xi**2 * wxi
    arg = np.sqrt(
        eta[:, None, None] ** 2
        + h * eta[:, None, None] * xi[None, :, None] * c[None, None, :]
        + 0.25 * h**2 * xi[None, :, None] ** 2
    )
    inner = trap(arg) @ wc
    return h * 8.0 * np.pi**2 * float(macro @ inner @ micro)


def quadratic_energy(
    kernel: PairKernel,
    trap,
    d: float,
    n_eta: int = 200,
    n_xi: int = 200,
    n_c: int = 32,
) -> QuadraticTerms:
    """Quadratic energy tr hbar (alpha conj(alpha)) + int V(./h) |alpha|^2.

    The relative-motion kinetic + binding part is grouped through the
    two-body operator -Delta + V + E0, which annihilates alpha0, so only
    genuine residuals (discretization, remainder profiles) survive there.
    """
    h, sol, psi = kernel.h, kernel.sol, kernel.psi
    a0 = sol.alpha0
    e0 = sol.e0_disc if sol.e0_disc is not None else sol.e0
    v_vals = _potential_values(sol.interaction, sol.grid)
    chi = kernel.remainder.chi if kernel.remainder else None
    rho = kernel.remainder.rho if kernel.remainder else None

    com = _grad_sq(psi) * a0.norm_sq()
    rel = psi.norm_sq() * _binding_form(a0, a0, v_vals, e0)
    wt = _w_pair_quad(trap, h, psi, psi, a0, a0, n_eta, n_xi, n_c)
    hs = psi.norm_sq() * a0.norm_sq()
    if chi is not None:
        com += 2.0 * _cross_grad(psi, chi) * a0.dot(rho) + _grad_sq(chi) * rho.norm_sq()
        rel += 2.0 * psi.dot(chi) * _binding_form(a0, rho, v_vals, e0)
        rel += chi.norm_sq() * _binding_form(rho, rho, v_vals, e0)
        wt += 2.0 * _w_pair_quad(trap, h, psi, chi, a0, rho, n_eta, n_xi, n_c)
        wt += _w_pair_quad(trap, h, chi, chi, rho, rho, n_eta, n_xi, n_c)
        hs += 2.0 * psi.dot(chi) * a0.dot(rho) + chi.norm_sq() * rho.norm_sq()
    return QuadraticTerms(
        com_kinetic=0.25 * h * com,
        rel_residual=rel / h,
        w_term=wt,
        d_term=-d * h * hs,
    )


def _cross_grad(fa: RadialFunction, fb: RadialFunction) -> float:
    """<grad fa, grad fb> via the shared Dirichlet edge sum."""
    ua = fa.grid.nodes * fa.values
    ub = fb.grid.nodes * fb.values
    da = np.diff(ua, prepend=0.0, append=0.0)
    db = np.diff(ub, prepend=0.0, append=0.0)
    return 4.0 * np.pi * float(np.sum(da * db)) / fa.grid.dr


def _radial_sampler(nodes: np.ndarray, density: np.ndarray):
    """Inverse-CDF sampler for a radial density (values >= 0 on grid nodes).

    Returns (draw, pdf): samples come from the piecewise-constant density the
    table actually encodes, and ``pdf`` evaluates that exact density, so
    importance weights built from it are unbiased at any table resolution.
    """
    edges = np.concatenate(([0.0], nodes))
    widths = np.diff(edges)
    mass = np.maximum(density, 0.0) * widths
    total = np.sum(mass)
    if total <= 0.0:
        raise ConfigurationError("cannot sample from an identically zero density")
    cdf = np.concatenate(([0.0], np.cumsum(mass) / total))
    cell_pdf = mass / (total * widths)

    def draw(rng, size):
        return np.interp(rng.random(size), cdf, edges)

    def pdf(r):
        idx = np.clip(np.searchsorted(edges, r, side="left") - 1, 0, len(nodes) - 1)
        return cell_pdf[idx]

    return draw, pdf


def _unit_vectors(rng, size):
    v = rng.standard_normal((size, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass
class QuarticTraces:
    """Monte Carlo estimates (mean, stderr) of the quartic operator traces.

    tr_hbar is tr hbar (alpha conj(alpha))^2; s4_4 estimates tr (alpha
    conj(alpha))^2 = ||alpha||_{S^4}^4.  Raw reduced integrals i_a..i_d are
    kept for cross checks against closed forms.
    """

    tr_rel: tuple
    tr_w: tuple
    tr_hbar: tuple
    s4_4: tuple
    i_a: tuple
    i_b: tuple
    i_c: tuple
    i_d: tuple
    samples: int
    seed: int


def quartic_trace_mc(
    kernel: PairKernel,
    trap,
    d: float,
    samples: int = 2_000_000,
    seed: int = 0,
    batch: int = 500_000,
) -> QuarticTraces:
    """Quartic traces of the product pair kernel by importance sampling.

    After centering the four-point cycle, the 12-dimensional integrals reduce
    to one center-of-mass vector X and three relative vectors; X is drawn
    with radial density |psi|^4 r^2 and each relative vector with density
    |alpha0| r^2 (the |alpha0|^2 profile has divergent importance weights
    for the four-factor integrand, the |alpha0| profile keeps the variance
    finite).  Estimates are deterministic for fixed (samples, seed, batch).
    """
    if kernel.remainder is not None:
        raise ConfigurationError("quartic traces are evaluated for product kernels only")
    h, sol, psi = kernel.h, kernel.sol, kernel.psi
    if psi.norm_sq() == 0.0:
        z = (0.0, 0.0)
        return QuarticTraces(z, z, z, z, z, z, z, z, samples, seed)

    a0 = sol.alpha0
    f1 = sol.halpha0  # (-Delta + E0) alpha0, smooth
    draw_x, pdf_x = _radial_sampler(psi.grid.nodes, psi.values**4 * psi.grid.nodes**2)
    draw_xi, pdf_xi = _radial_sampler(a0.grid.nodes, np.abs(a0.values) * a0.grid.nodes**2)

    names = ("i_a", "i_b", "i_c", "i_d", "tr_rel", "tr_w", "tr_hbar", "s4_4")
    acc = {k: np.zeros(2) for k in names}
    n_batches = (samples + batch - 1) // batch
    children = np.random.SeedSequence(seed).spawn(n_batches)
    done = 0
    for child in children:
        m = min(batch, samples - done)
        rng = np.random.default_rng(child)
        xr = draw_x(rng, m)
        big_x = xr[:, None] * _unit_vectors(rng, m)
        xis = [draw_xi(rng, m)[:, None] * _unit_vectors(rng, m) for _ in range(3)]
        xi1, xi2, xi3 = xis
        xi_star = -(xi1 + xi2 + xi3)
        s_vec = 0.25 * (xi1 + 2.0 * xi2 + xi3)
        t_vec = 0.25 * (xi3 - xi1)
        q_vec = 0.25 * (3.0 * xi1 + 2.0 * xi2 + xi3)
        rad = lambda v: np.linalg.norm(v, axis=1)
        m12 = psi(rad(big_x - h * s_vec))
        m23 = psi(rad(big_x + h * t_vec))
        m34 = psi(rad(big_x + h * s_vec))
        r41 = rad(big_x - h * t_vec)
        m41 = psi(r41)
        psi4 = m12 * m23 * m34 * m41

        r1, r2, r3, rs = rad(xi1), rad(xi2), rad(xi3), rad(xi_star)
        a1, a2, a3 = a0(r1), a0(r2), a0(r3)
        a_star = a0(rs)
        # inverse of the exact 3D sampling density, one factor per vector
        wgt = (
            4.0 * np.pi * xr**2 / np.maximum(pdf_x(xr), 1e-300)
            * np.prod(
                [4.0 * np.pi * rr**2 / np.maximum(pdf_xi(rr), 1e-300) for rr in (r1, r2, r3)],
                axis=0,
            )
        )
        base = psi4 * a_star * wgt
        va = base * f1(r1) * a2 * a3
        vd = base * a1 * a2 * a3
        vb = kernel.laplacian_psi(r41) * m12 * m23 * m34 * a1 * a2 * a3 * a_star * wgt
        vc = trap(rad(big_x - h * q_vec)) * vd
        v_rel = h * va - 0.25 * h**3 * vb
        v_w = h**3 * vc
        v_hbar = v_rel + v_w - d * h**3 * vd
        rows = {
            "i_a": va, "i_b": vb, "i_c": vc, "i_d": vd,
            "tr_rel": v_rel, "tr_w": v_w, "tr_hbar": v_hbar, "s4_4": h * vd,
        }
        for k, v in rows.items():
            acc[k] += (np.sum(v), np.sum(v * v))
        done += m

    out = {}
    for k in names:
        mean = acc[k][0] / done
        var = max(acc[k][1] / done - mean**2, 0.0)
        out[k] = (float(mean), float(np.sqrt(var / done)))
    tm, ts = out["tr_hbar"]
    if tm != 0.0 and ts > 0.05 * abs(tm):
        warnings.warn(
            f"quartic trace relative stderr {ts / abs(tm):.2e} exceeds 5%; increase samples",
            VarianceWarning,
        )
    return QuarticTraces(
        out["tr_rel"], out["tr_w"], out["tr_hbar"], out["s4_4"],
        out["i_a"], out["i_b"], out["i_c"], out["i_d"], samples, seed,
    )


@dataclass
class EnergyBreakdown:
    """Microscopic energy of a trial state, term by term.

    total = quadratic.total + (1 + lambda h) * tr_hbar_quartic, with the
    Monte Carlo standard error of the quartic part propagated to the total.
    """

    quadratic: QuadraticTerms
    quartic: QuarticTraces
    lam: float
    s1: float
    h: float
    total: float
    total_stderr: float
    hs_norm_sq: float


def trial_bcs_energy(
    trial: TrialState,
    trap,
    d: float,
    samples: int = 2_000_000,
    seed: int = 0,
    batch: int = 500_000,
    n_eta: int = 200,
    n_xi: int = 200,
    n_c: int = 32,
) -> EnergyBreakdown:
    """Full microscopic energy of an admissible trial state."""
    kernel = trial.kernel
    quad = quadratic_energy(kernel, trap, d, n_eta, n_xi, n_c)
    quart = quartic_trace_mc(kernel, trap, d, samples=samples, seed=seed, batch=batch)
    scale = 1.0 + trial.lam * kernel.h
    total = quad.total + scale * quart.tr_hbar[0]
    return EnergyBreakdown(
        quadratic=quad,
        quartic=quart,
        lam=trial.lam,
        s1=trial.s1,
        h=kernel.h,
        total=total,
        total_stderr=scale * quart.tr_hbar[1],
        hs_norm_sq=kernel.hs_norm_sq(),
    )


@dataclass
class Decomposition:
    """Projection of a pair kernel onto the alpha0 channel and its complement."""

    psi_projected: RadialFunction
    overlap: float
    projection_residual: float
    pythagoras_residual: float


def decompose_alpha(kernel: PairKernel) -> Decomposition:
    """Recover the macroscopic field by projecting the kernel onto alpha0.

    For a kernel psi x alpha0 + chi x rho the projection returns
    psi ||alpha0||^2 + chi <alpha0, rho>; with rho orthogonal to alpha0 the
    original psi comes back exactly up to quadrature error, and the squared
    Hilbert-Schmidt norm splits Pythagorean-fashion across the channels.
    """
    a0 = kernel.alpha0
    a0_sq = a0.norm_sq()
    vals = kernel.psi.values * a0_sq
    overlap = 0.0
    if kernel.remainder is not None:
        overlap = a0.dot(kernel.remainder.rho)
        vals = vals + kernel.remainder.chi(kernel.psi.grid.nodes) * overlap
    psi_rec = RadialFunction(kernel.psi.grid, vals, name="psi_projected")
    diff = RadialFunction(kernel.psi.grid, vals - kernel.psi.values)
    proj_res = np.sqrt(max(diff.norm_sq(), 0.0)) / max(kernel.psi.norm(), 1e-300)
    lhs = kernel.hs_norm_sq()
    # channel sum without the cross term: a genuine orthogonality diagnostic
    rhs = kernel.psi.norm_sq() * a0_sq
    if kernel.remainder is not None:
        rhs += kernel.remainder.chi.norm_sq() * kernel.remainder.rho.norm_sq()
    rhs /= kernel.h
    pyth = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return Decomposition(psi_rec, overlap, float(proj_res), float(pyth))
