"""Phase-field topology optimization of two-phase printed active composites.

Computes optimal active/passive material layouts by solving the two coupled
linear-elasticity stages of the shape-memory cycle and their adjoints with
P1 finite elements, then descending the regularized target-matching cost via
a semi-implicit, obstacle-constrained gradient flow.
"""

from .assembly import Assembler, BoundarySpec, ConfigurationError, SparseSpdSystem
from .material import (IsotropicElasticity, MaterialModel, Stage,
                       default_material, lame_from_youngs)
from .mesh import FacetTag, SimplexMesh, build_box_mesh, facet_area
from .pipeline import (CostBreakdown, EnergyTrace, OptState, Pipeline,
                       PipelineError, RunConfig, RunResult, run, with_overrides)
from .solver import (ConvergenceError, SolveReport, TimeStepError,
                     projected_gauss_seidel, solve_obstacle_vi, solve_spd)
from .targets import (PRESET_IDS, TargetProfile, TargetSpec, eval_target,
                      eval_target_nodal, preset)

__version__ = "0.1.0"

__all__ = [
    "Assembler", "BoundarySpec", "ConfigurationError", "SparseSpdSystem",
    "IsotropicElasticity", "MaterialModel", "Stage", "default_material",
    "lame_from_youngs",
    "FacetTag", "SimplexMesh", "build_box_mesh", "facet_area",
    "CostBreakdown", "EnergyTrace", "OptState", "Pipeline", "PipelineError",
    "RunConfig", "RunResult", "run", "with_overrides",
    "ConvergenceError", "SolveReport", "TimeStepError",
    "projected_gauss_seidel", "solve_obstacle_vi", "solve_spd",
    "PRESET_IDS", "TargetProfile", "TargetSpec", "eval_target",
    "eval_target_nodal", "preset",
    "__version__",
]
