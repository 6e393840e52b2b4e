"""Interaction potentials, external traps and the scaled two-channel model.

The microscopic problem couples a short-range attractive pair interaction V
(on the relative scale, i.e. V(x/h)) to a slowly varying external potential W
(on the macroscopic scale).  The chemical potential sits near the negative of
the pair binding energy: mu = -E0 + D h^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import ConfigurationError, RadialFunction


@dataclass(frozen=True)
class SphericalWell:
    """Attractive square well -depth * 1_{r < radius}.

    At a node that lands exactly on the jump the midpoint value -depth/2 is
    returned; with a grid aligned to the radius this keeps the finite
    difference eigensolver second-order accurate.
    """

    depth: float
    radius: float = 1.0

    def __post_init__(self):
        if self.depth <= 0 or self.radius <= 0:
            raise ConfigurationError("well depth and radius must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        v = np.where(r < self.radius, -self.depth, 0.0)
        return np.where(np.isclose(r, self.radius, rtol=0, atol=1e-12 * self.radius), -self.depth / 2.0, v)


@dataclass(frozen=True)
class GaussianWell:
    """Smooth attractive well -depth * exp(-(r/width)^2)."""

    depth: float
    width: float = 1.0

    def __post_init__(self):
        if self.depth <= 0 or self.width <= 0:
            raise ConfigurationError("well depth and width must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return -self.depth * np.exp(-((r / self.width) ** 2))


@dataclass(frozen=True)
class HarmonicTrap:
    """Isotropic trap c * r^2."""

    coefficient: float = 1.0

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ConfigurationError("trap coefficient must be positive")

    def __call__(self, r):
        return self.coefficient * np.asarray(r, dtype=float) ** 2

    @property
    def growth_exponent(self) -> float:
        return 2.0


@dataclass(frozen=True)
class PowerLawTrap:
    """Trap c * r^beta with beta >= 1 (confining, locally bounded)."""

    coefficient: float = 1.0
    beta: float = 2.0

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ConfigurationError("trap coefficient must be positive")
        if self.beta < 1.0:
            raise ConfigurationError("trap exponent must be at least 1")

    def __call__(self, r):
        return self.coefficient * np.asarray(r, dtype=float) ** self.beta

    @property
    def growth_exponent(self) -> float:
        return self.beta


@dataclass(frozen=True)
class TabulatedRadial:
    """Potential defined by radial samples (spline interpolated)."""

    table: RadialFunction

    def __call__(self, r):
        return self.table(r)


@dataclass
class PhysicsModel:
    """Full problem data: interaction V, trap W, scale ratio h and offset D.

    The effective chemical potential is mu = -E0 + D h^2 where E0 is the
    pair binding energy of V; ``mu(E0)`` evaluates it.
    """

    interaction: object
    trap: object
    h: float
    D: float

    def __post_init__(self):
        if not (0.0 < self.h < 1.0):
            raise ConfigurationError(f"scale ratio h must lie in (0, 1), got {self.h}")
        if not callable(self.interaction) or not callable(self.trap):
            raise ConfigurationError("interaction and trap must be callable potentials")

    def mu(self, e0: float) -> float:
        return -e0 + self.D * self.h**2

    def with_h(self, h: float) -> "PhysicsModel":
        return PhysicsModel(self.interaction, self.trap, h, self.D)

    def with_d(self, d: float) -> "PhysicsModel":
        return PhysicsModel(self.interaction, self.trap, self.h, d)
