"""Numerical toolkit for a pairing functional and its macroscopic limit.

Modules
-------
grids       radial quadrature grids, eigensolvers, Fourier transforms
model       interaction / trap potentials and the scaled problem data
twobody     bound pair state, spectral gap, quartic coupling constant
gp          effective macroscopic functional and its minimizers
pairing     pair kernels, trial states, microscopic energy evaluation
asymptotics scale sweeps, power-law fits, critical coupling estimates
oracles     closed-form reference values used to validate the numerics
"""

from .grids import (
    ConfigurationError,
    NoSignChangeError,
    EigensolverError,
    RadialFunction,
    RadialGrid,
    ResolutionWarning,
    TailWarning,
    build_radial_grid,
    find_root_scalar,
    radial_eigensolve,
    radial_fourier,
)
from .model import (
    GaussianWell,
    HarmonicTrap,
    PhysicsModel,
    PowerLawTrap,
    SphericalWell,
    TabulatedRadial,
)
from .twobody import (
    GapViolatedError,
    NoBoundStateError,
    TwoBodySolution,
    alpha0_diagnostics,
    compute_g_bcs,
    compute_spectral_gap,
    solve_ground_state,
    solve_two_body,
    tune_gaussian_well,
)
from .gp import (
    ConstrainedGPResult,
    DomainError,
    GLSplit,
    GPResult,
    NonConvergedError,
    apriori_bounds_check,
    gl_split,
    gp_energy,
    gp_gradient,
    minimize_gp_constrained,
    minimize_gp_unconstrained,
    solve_trap_ground,
)

__version__ = "0.1.0"
