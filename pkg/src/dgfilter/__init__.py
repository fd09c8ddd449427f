"""Filtered monotonization of nodal DG schemes for hyperbolic conservation laws.

A high-order collocation DG operator and a monotone first-order finite
volume operator advance the same state through each SSP Runge-Kutta stage;
a nodewise filter blends the two results, keeping the high-order values
where the solution is smooth and falling back to the monotone ones near
discontinuities. Works for scalar advection and the compressible Euler
equations on uniform and quadtree-adaptive quadrilateral meshes.
"""

from .amr import AdaptPolicy, adapt, compute_indicator
from .basis import LobattoBasis1D, TensorBasis2D, lobatto_basis, lobatto_nodes
from .dg import DGOperator, Discretization, NodalField, rusanov_flux
from .errors import ConfigError, MeshError, StateError
from .filtering import FilterConfig, apply_absolute, apply_filter, apply_relative, filter_f1, filter_f2
from .fv import CellAverageField, FVOperator, broadcast_to_nodes, project_to_averages
from .mesh import QuadMesh, build_uniform, coarsen, min_diameter, refine
from .models import AdvectionModel, EulerModel, EulerState, IdealGasEos
from .reference import (
    ErrorReport,
    convergence_rate,
    error_norms,
    radial_explosion_reference,
    riemann_star_state,
    sod_exact,
    vortex_exact,
)
from .stepping import FilteredStepper, StageScheme, StepController, compute_dt, scheme_for_degree, ssp2, ssp3

__version__ = "0.1.0"

__all__ = [
    "AdaptPolicy", "adapt", "compute_indicator",
    "LobattoBasis1D", "TensorBasis2D", "lobatto_basis", "lobatto_nodes",
    "DGOperator", "Discretization", "NodalField", "rusanov_flux",
    "ConfigError", "MeshError", "StateError",
    "FilterConfig", "apply_absolute", "apply_filter", "apply_relative",
    "filter_f1", "filter_f2",
    "CellAverageField", "FVOperator", "broadcast_to_nodes", "project_to_averages",
    "QuadMesh", "build_uniform", "coarsen", "min_diameter", "refine",
    "AdvectionModel", "EulerModel", "EulerState", "IdealGasEos",
    "ErrorReport", "convergence_rate", "error_norms",
    "radial_explosion_reference", "riemann_star_state", "sod_exact", "vortex_exact",
    "FilteredStepper", "StageScheme", "StepController", "compute_dt",
    "scheme_for_degree", "ssp2", "ssp3",
    "__version__",
]
