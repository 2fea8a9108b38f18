"""Continuous, discontinuous and mixed continuous-discontinuous Galerkin
solvers for stationary advection-diffusion on structured quad meshes."""

from .assembly import DGParameters, LinearSystem, assemble_system
from .mesh import RegionSpec, build_structured_mesh, classify_boundary_flow, classify_regions
from .postprocess import DiscreteField, SweepRecord, l2_norm_diff, linf_norm_diff
from .problems import ProblemSpec, example1, example2, manufactured_linear
from .space import DofMap, MethodKind, apply_dirichlet_constraints, build_dof_map

__version__ = "0.1.0"

__all__ = [
    "DGParameters", "LinearSystem", "assemble_system",
    "RegionSpec", "build_structured_mesh", "classify_boundary_flow", "classify_regions",
    "DiscreteField", "SweepRecord", "l2_norm_diff", "linf_norm_diff",
    "ProblemSpec", "example1", "example2", "manufactured_linear",
    "DofMap", "MethodKind", "apply_dirichlet_constraints", "build_dof_map",
]
