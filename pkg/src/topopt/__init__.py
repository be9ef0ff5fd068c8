"""Density-based topology optimization (SIMP and BESO) on regular 2D grids."""
from ._backend import BACKEND
from .beso import BesoConfig, run_beso
from .errors import (
    ConfigError,
    ConstraintError,
    NumericalError,
    ParameterError,
    RunAborted,
    StateError,
    StructuralError,
    TopOptError,
)
from .grid_fem import ElastParams, GridMesh, LoadCase, assemble_and_solve, compliance, element_stiffness
from .record import OptRecord
from .sens_filter import FilterKernel, build_kernel, filter_field, filter_sensitivities
from .simp import SimpConfig, oc_update, run_simp

__all__ = [
    "BACKEND",
    "BesoConfig",
    "ConfigError",
    "ConstraintError",
    "ElastParams",
    "FilterKernel",
    "GridMesh",
    "LoadCase",
    "NumericalError",
    "OptRecord",
    "ParameterError",
    "RunAborted",
    "SimpConfig",
    "StateError",
    "StructuralError",
    "TopOptError",
    "assemble_and_solve",
    "build_kernel",
    "compliance",
    "element_stiffness",
    "filter_field",
    "filter_sensitivities",
    "oc_update",
    "run_beso",
    "run_simp",
]
