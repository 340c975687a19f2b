"""Target displacement profiles and the built-in experiment presets.

Three closed-form profile families are supported: a parabolic bend
c*x1^2, a cosine bend c*(1 - cos(k*pi*x1/L1)), both acting along a fixed
axis, and a twist c*x1*x2 acting along e3 in 3D.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .assembly import BoundarySpec, ConfigurationError
from .material import default_material
from .mesh import FacetTag

__all__ = [
    "TargetProfile",
    "TargetSpec",
    "eval_target",
    "eval_target_nodal",
    "preset",
    "PRESET_IDS",
]


class TargetProfile(Enum):
    PARABOLIC = "parabolic"
    COSINE = "cosine"
    TWIST = "twist"


@dataclass(frozen=True)
class TargetSpec:
    """Closed-form target displacement and its matching weight.

    `axis` is the displacement direction (e2 in 2D, e3 in 3D); `weight` is
    the symmetric positive semidefinite d x d matching matrix.  The target
    surface itself is part of BoundarySpec.
    """

    profile: TargetProfile
    c_tar: float
    axis: tuple
    weight: tuple
    k_tar: float = None

    def __post_init__(self):
        if self.c_tar <= 0.0:
            raise ConfigurationError(f"c_tar must be positive, got {self.c_tar}")
        if self.profile is TargetProfile.COSINE:
            if self.k_tar is None or self.k_tar <= 0.0:
                raise ConfigurationError("cosine profile requires k_tar > 0")
        w = self.weight_matrix()
        if not np.allclose(w, w.T, atol=1e-14):
            raise ConfigurationError("weight matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(w)) < -1e-12:
            raise ConfigurationError("weight matrix must be positive semidefinite")

    @property
    def dim(self):
        return len(self.axis)

    def weight_matrix(self):
        return np.asarray(self.weight, dtype=float).reshape(self.dim, self.dim)

    def axis_vector(self):
        return np.asarray(self.axis, dtype=float)


def eval_target(spec, x, domain_length):
    """Target displacement at a single point x; `domain_length` is L1."""
    x = np.asarray(x, dtype=float)
    axis = spec.axis_vector()
    if spec.profile is TargetProfile.PARABOLIC:
        return spec.c_tar * x[0] ** 2 * axis
    if spec.profile is TargetProfile.COSINE:
        arg = spec.k_tar * math.pi * x[0] / domain_length
        return spec.c_tar * (1.0 - math.cos(arg)) * axis
    if spec.profile is TargetProfile.TWIST:
        return spec.c_tar * x[0] * x[1] * axis
    raise ConfigurationError(f"unknown target profile {spec.profile!r}")


def eval_target_nodal(spec, points, domain_length):
    """Vectorized target displacement, shape (n_points, d)."""
    points = np.asarray(points, dtype=float)
    axis = spec.axis_vector()
    if spec.profile is TargetProfile.PARABOLIC:
        scalar = spec.c_tar * points[:, 0] ** 2
    elif spec.profile is TargetProfile.COSINE:
        arg = spec.k_tar * np.pi * points[:, 0] / domain_length
        scalar = spec.c_tar * (1.0 - np.cos(arg))
    elif spec.profile is TargetProfile.TWIST:
        scalar = spec.c_tar * points[:, 0] * points[:, 1]
    else:
        raise ConfigurationError(f"unknown target profile {spec.profile!r}")
    return scalar[:, None] * axis[None, :]


def _identity(d):
    return tuple(np.eye(d).ravel())

def _outer_last(d):
    w = np.zeros((d, d))
    w[d - 1, d - 1] = 1.0
    return tuple(w.ravel())

def _axis_last(d):
    e = np.zeros(d)
    e[d - 1] = 1.0
    return tuple(e)


# Domain, profile, c, k, W, target faces, eps, gamma per experiment row.
_PRESETS = {
    "T1R1": dict(extents=((0.0, 6.0), (-0.5, 0.5)),
                 profile=TargetProfile.PARABOLIC, c=0.075, k=None, weight="id",
                 target=(FacetTag.RIGHT, FacetTag.TOP, FacetTag.BOTTOM),
                 eps=1.0 / (8.0 * math.pi), gamma=0.01),
    "T1R2": dict(extents=((0.0, 6.0), (-0.5, 0.5)),
                 profile=TargetProfile.COSINE, c=0.25, k=2.0, weight="axis",
                 target=(FacetTag.RIGHT, FacetTag.TOP, FacetTag.BOTTOM),
                 eps=1.0 / (8.0 * math.pi), gamma=0.01),
    "T1R3": dict(extents=((0.0, 12.0), (-0.5, 0.5)),
                 profile=TargetProfile.PARABOLIC, c=0.02, k=None, weight="id",
                 target=(FacetTag.RIGHT, FacetTag.TOP, FacetTag.BOTTOM),
                 eps=1.0 / (8.0 * math.pi), gamma=0.01),
    "T1R4": dict(extents=((0.0, 12.0), (-0.5, 0.5)),
                 profile=TargetProfile.COSINE, c=1.0, k=1.5, weight="id",
                 target=(FacetTag.TOP,),
                 eps=1.0 / (8.0 * math.pi), gamma=0.01),
    "T2R1": dict(extents=((0.0, 6.0), (-1.5, 1.5), (0.0, 1.0)),
                 profile=TargetProfile.PARABOLIC, c=0.075, k=None, weight="id",
                 target=(FacetTag.TOP,),
                 eps=1.0 / (4.0 * math.pi), gamma=0.01),
    "T2R2": dict(extents=((0.0, 12.0), (-1.5, 1.5), (0.0, 1.0)),
                 profile=TargetProfile.COSINE, c=1.0, k=2.0, weight="axis",
                 target=(FacetTag.TOP,),
                 eps=1.0 / (4.0 * math.pi), gamma=0.1),
    "T2R3": dict(extents=((0.0, 12.0), (-1.5, 1.5), (0.0, 1.0)),
                 profile=TargetProfile.COSINE, c=1.0, k=2.0, weight="id",
                 target=(FacetTag.TOP,),
                 eps=1.0 / (4.0 * math.pi), gamma=0.01),
    "T2R4": dict(extents=((0.0, 6.0), (-3.0, 3.0), (0.0, 1.0)),
                 profile=TargetProfile.TWIST, c=0.1, k=None, weight="axis",
                 target=(FacetTag.RIGHT,),
                 eps=1.0 / (2.0 * math.pi), gamma=0.02),
}

PRESET_IDS = tuple(sorted(_PRESETS))

TRACTION_MAGNITUDE = 0.1


def preset(preset_id, scale=1.0):
    """RunConfig for one of the built-in experiment rows.

    `scale` multiplies the base resolution, which targets a mesh size of
    eps/2 per axis; the caller usually coarsens (the acceptance runs use
    explicit resolutions instead).
    """
    from .pipeline import RunConfig

    if preset_id not in _PRESETS:
        raise ConfigurationError(
            f"unknown preset {preset_id!r}; known: {', '.join(PRESET_IDS)}")
    row = _PRESETS[preset_id]
    extents = row["extents"]
    d = len(extents)
    eps = row["eps"]
    gamma = row["gamma"]
    resolution = tuple(
        max(1, round(scale * (hi - lo) / (eps / 2.0))) for lo, hi in extents)

    weight = _identity(d) if row["weight"] == "id" else _outer_last(d)
    target_spec = TargetSpec(
        profile=row["profile"], c_tar=row["c"], k_tar=row["k"],
        axis=_axis_last(d), weight=weight)
    boundary = BoundarySpec(
        dirichlet_stage1=frozenset({FacetTag.LEFT}),
        dirichlet_stage2=frozenset({FacetTag.LEFT}),
        target=frozenset(row["target"]))
    zero = (0.0,) * d
    pull = (TRACTION_MAGNITUDE,) + (0.0,) * (d - 1)
    return RunConfig(
        extents=extents,
        resolution=resolution,
        boundary=boundary,
        material=default_material(),
        body_force_stage1=zero,
        body_force_stage2=zero,
        tractions_stage1={FacetTag.RIGHT: pull},
        tractions_stage2={},
        target=target_spec,
        epsilon=eps,
        gamma=gamma,
        tau=eps * eps / (100.0 * gamma),
    )
