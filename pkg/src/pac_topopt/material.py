"""Constitutive data: stage elasticity tensors, fixity, and the obstacle
potential's smooth part.

Both stages interpolate two isotropic endpoint tensors linearly in the
phase value s in [-1, 1], with s = +1 the active material and s = -1 the
passive one:

    C(s) A = (1+s)/2 * C_plus A + (1-s)/2 * C_minus A,
    C_pm A = 2 mu_pm A + lambda_pm tr(A) I.

2D runs use plane strain, i.e. the 3D Lame formulas; the fixity function is
chi(s) = (2/5)(1+s) and the smooth potential part is psi(s) = (1-s^2)/2.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Stage",
    "IsotropicElasticity",
    "MaterialModel",
    "lame_from_youngs",
    "default_material",
    "fixity",
    "fixity_prime",
    "potential",
    "potential_prime",
]

FIXITY_SLOPE = 0.4


class Stage(Enum):
    PROGRAMMING = "programming"  # stage 1, loaded at high temperature
    PROGRAMMED = "programmed"  # stage 2, after cooling and unloading


def lame_from_youngs(youngs_modulus, poisson_ratio):
    """Lame parameters (lambda, mu) from (E, nu), plane-strain convention.

    The same formulas are used in 2D and 3D.  Raises for E <= 0 and for
    nu outside (-1, 1/2); nu -> 1/2 is the incompressible limit.
    """
    E = float(youngs_modulus)
    nu = float(poisson_ratio)
    if E <= 0.0:
        raise ValueError(f"Young's modulus must be positive, got {E}")
    if nu <= -1.0 or nu >= 0.5:
        raise ValueError(f"Poisson ratio must lie in (-1, 0.5), got {nu} "
                         "(nu = 0.5 is incompressible)")
    mu = E / (2.0 * (1.0 + nu))
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return lam, mu


@dataclass(frozen=True)
class IsotropicElasticity:
    youngs_modulus: float
    poisson_ratio: float

    def __post_init__(self):
        lame_from_youngs(self.youngs_modulus, self.poisson_ratio)

    @property
    def lame_lambda(self):
        return lame_from_youngs(self.youngs_modulus, self.poisson_ratio)[0]

    @property
    def lame_mu(self):
        return lame_from_youngs(self.youngs_modulus, self.poisson_ratio)[1]


@dataclass(frozen=True)
class MaterialModel:
    """Endpoint tensors for both stages of the shape-memory cycle."""

    stage1_plus: IsotropicElasticity
    stage1_minus: IsotropicElasticity
    stage2_plus: IsotropicElasticity
    stage2_minus: IsotropicElasticity

    def endpoints(self, stage):
        if stage is Stage.PROGRAMMING:
            return self.stage1_plus, self.stage1_minus
        if stage is Stage.PROGRAMMED:
            return self.stage2_plus, self.stage2_minus
        raise ValueError(f"unknown stage {stage!r}")

    def lame(self, stage, s):
        """Interpolated (lambda, mu) at phase value(s) s; vectorized in s."""
        plus, minus = self.endpoints(stage)
        s = np.asarray(s, dtype=float)
        wp = 0.5 * (1.0 + s)
        wm = 0.5 * (1.0 - s)
        lam = wp * plus.lame_lambda + wm * minus.lame_lambda
        mu = wp * plus.lame_mu + wm * minus.lame_mu
        return lam, mu

    def lame_difference(self, stage):
        """(lambda, mu) of the tensor derivative (C_plus - C_minus)/2."""
        plus, minus = self.endpoints(stage)
        return (
            0.5 * (plus.lame_lambda - minus.lame_lambda),
            0.5 * (plus.lame_mu - minus.lame_mu),
        )

    def stress(self, stage, s, strain):
        """C(s) applied to a symmetric strain matrix."""
        strain = np.asarray(strain, dtype=float)
        lam, mu = self.lame(stage, s)
        d = strain.shape[0]
        return 2.0 * mu * strain + lam * np.trace(strain) * np.eye(d)

    def stress_phase_derivative(self, stage, strain):
        """dC/ds applied to a strain matrix; independent of s."""
        strain = np.asarray(strain, dtype=float)
        dlam, dmu = self.lame_difference(stage)
        d = strain.shape[0]
        return 2.0 * dmu * strain + dlam * np.trace(strain) * np.eye(d)


def default_material():
    """The two-phase composite used by all experiment presets."""
    return MaterialModel(
        stage1_plus=IsotropicElasticity(3.0, 0.45),
        stage1_minus=IsotropicElasticity(0.7, 0.45),
        stage2_plus=IsotropicElasticity(13.0, 0.45),
        stage2_minus=IsotropicElasticity(0.6, 0.45),
    )


def fixity(s):
    """Fraction of programmed strain retained after unloading; 0 when passive."""
    return FIXITY_SLOPE * (1.0 + np.asarray(s, dtype=float))


def fixity_prime(s):
    s = np.asarray(s, dtype=float)
    return np.full_like(s, FIXITY_SLOPE)


def potential(s):
    """Smooth part of the double-obstacle potential."""
    s = np.asarray(s, dtype=float)
    return 0.5 * (1.0 - s * s)


def potential_prime(s):
    return -np.asarray(s, dtype=float)
