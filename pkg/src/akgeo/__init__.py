"""Numerical engine for four-dimensional almost-Hermitian frame geometry.

The package computes, from a unitary coframe on a 4-manifold chart:
the Levi-Civita connection and its curvature, the induced U(2) structure
(intrinsic torsion, u(2) connection, structure 2-forms), the associated
gauge-theoretic action densities built from a composite connection with
a weight-matrix insertion, their Euler-Lagrange residuals in both
connection and metric variables, and a periodic-lattice variational
solver for the metric form of the functional.
"""

from .jets import DIM, Jet, JetDepthError
from .forms import BASES, MatrixForm, ShapeMismatchError, residual, scalar_identity
from .frames import (
    Coframe,
    DegenerateFrameError,
    UnitaryCoframe,
    frame_field,
    sample_points,
)
from .geometry import (
    RicciData,
    StructureForms,
    U2Data,
    curvature,
    eps_contraction_form,
    extract_u2,
    ricci_data,
    scalar_curvature,
    solve_levi_civita,
    structure_forms,
)
from .gauge import (
    CanonicalAbelian,
    InsertionParams,
    Su3Curvature,
    Su3Data,
    canonical_connection,
    coeffs_from_pqrs,
    el_residuals_connection,
    el_residuals_geometric,
    geometric_abelian,
    kahler_einstein_check,
    metric_lagrangian_density,
    model_lagrangian,
    model_metric_residual,
)
from .lattice import (
    FlowConfig,
    FlowLog,
    LatticeState,
    configure_threads,
    descend,
    gradient_norm,
    lattice_action,
    lattice_gradient,
    lattice_residuals,
)
from .checks import CHECK_NAMES, point_checks, random_frame_suite, run_suite

__all__ = [
    "DIM",
    "Jet",
    "JetDepthError",
    "BASES",
    "MatrixForm",
    "ShapeMismatchError",
    "residual",
    "scalar_identity",
    "Coframe",
    "DegenerateFrameError",
    "UnitaryCoframe",
    "frame_field",
    "sample_points",
    "RicciData",
    "StructureForms",
    "U2Data",
    "curvature",
    "eps_contraction_form",
    "extract_u2",
    "ricci_data",
    "scalar_curvature",
    "solve_levi_civita",
    "structure_forms",
    "CanonicalAbelian",
    "InsertionParams",
    "Su3Curvature",
    "Su3Data",
    "canonical_connection",
    "coeffs_from_pqrs",
    "el_residuals_connection",
    "el_residuals_geometric",
    "geometric_abelian",
    "kahler_einstein_check",
    "metric_lagrangian_density",
    "model_lagrangian",
    "model_metric_residual",
    "FlowConfig",
    "FlowLog",
    "LatticeState",
    "configure_threads",
    "descend",
    "gradient_norm",
    "lattice_action",
    "lattice_gradient",
    "lattice_residuals",
    "CHECK_NAMES",
    "point_checks",
    "random_frame_suite",
    "run_suite",
]

__version__ = "0.1.0"
