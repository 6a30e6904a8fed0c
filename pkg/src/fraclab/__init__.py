"""Grid laboratory for the integral fractional Laplacian on bounded domains.

Solvers for the exterior-zero Dirichlet problem (elliptic and parabolic),
estimators for fractional Sobolev/Besov/potential norms, cut-off
localization machinery, and refinement-based regularity probes.
"""

from .errors import (
    CollarError,
    ConfigError,
    FracLabError,
    GridSizeError,
    InconclusiveVerdictError,
    LengthMismatchError,
    LocalizationError,
    MemoryBudgetError,
    SingularOperatorError,
)
from .gridfn import CutoffSpec, Grid, GridFunction, build_cutoff, build_grid, extend_by_zero, smoothstep
from .operator import (
    FractionalParams,
    OperatorMatrix,
    apply_fractional_laplacian,
    assemble_operator_matrix,
    normalization_constant,
)
from .regions import Ball, Box, DisjointUnion

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "Box",
    "CollarError",
    "ConfigError",
    "CutoffSpec",
    "DisjointUnion",
    "FracLabError",
    "FractionalParams",
    "Grid",
    "GridFunction",
    "GridSizeError",
    "InconclusiveVerdictError",
    "LengthMismatchError",
    "LocalizationError",
    "MemoryBudgetError",
    "OperatorMatrix",
    "SingularOperatorError",
    "apply_fractional_laplacian",
    "assemble_operator_matrix",
    "build_cutoff",
    "build_grid",
    "extend_by_zero",
    "normalization_constant",
    "smoothstep",
]
