"""Lowest-order edge virtual elements for H(curl) interface problems on
unfitted triangulations cut by a level-set interface."""

from .assembly import CoefficientField, apply_dirichlet, assemble_system, boundary_values
from .exceptions import (
    AssumptionAViolation,
    AssumptionBViolation,
    CutVEMError,
    DegenerateTriangle,
    GeometryError,
    MissingBoundaryValue,
    MultipleRoots,
    NoConvergence,
    NonConvexQuad,
)
from .geometry import Circle, LevelSetInterface, edge_intersection, make_interface, register_interface
from .harness import (
    ConstantField,
    ConvergenceReport,
    ManufacturedCase,
    StudyConfig,
    compute_errors,
    emit_report,
    run_convergence_study,
    solve_vem,
)
from .mesh import CutMesh, build_background_mesh, certify, cut_mesh, detect_interface_elements, verify_max_angle
from .solver import cg_solve, spd_probe
from .verify import energy_norm, galerkin_oracle_solve, interpolate_exact, run_property_suite

__version__ = "0.1.0"

__all__ = [
    "AssumptionAViolation", "AssumptionBViolation", "Circle", "CoefficientField", "ConstantField",
    "ConvergenceReport", "CutMesh", "CutVEMError", "DegenerateTriangle", "GeometryError",
    "LevelSetInterface", "ManufacturedCase", "MissingBoundaryValue", "MultipleRoots", "NoConvergence",
    "NonConvexQuad", "StudyConfig", "apply_dirichlet", "assemble_system", "boundary_values",
    "build_background_mesh", "certify", "cg_solve", "compute_errors", "cut_mesh",
    "detect_interface_elements", "edge_intersection", "emit_report", "energy_norm",
    "galerkin_oracle_solve", "interpolate_exact", "make_interface", "register_interface",
    "run_convergence_study", "run_property_suite", "solve_vem", "spd_probe", "verify_max_angle",
]
