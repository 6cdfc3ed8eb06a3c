"""Inner-outer Picard solvers for the absolute value equation ``Ax - |x| = b``."""

__version__ = "0.1.0"

from .linalg import SparseMatrix, kron, split_symmetric  # noqa: E402
from .problems import AveProblem, ProblemSpec, make_problem  # noqa: E402
from .solvers_ave import (Method, SolveReport, SolverConfig, Status,  # noqa: E402
                          picard_hss_solve, picard_shss_residual_solve, picard_shss_solve,
                          picard_solve, residual, solve)
from .solvers_linear import InnerMode, InnerPolicy, SplitOperator  # noqa: E402
from .spectral import SpectralBounds, spectral_bounds  # noqa: E402

__all__ = [
    "AveProblem",
    "InnerMode",
    "InnerPolicy",
    "Method",
    "ProblemSpec",
    "SolveReport",
    "SolverConfig",
    "SparseMatrix",
    "SpectralBounds",
    "SplitOperator",
    "Status",
    "kron",
    "make_problem",
    "picard_hss_solve",
    "picard_shss_residual_solve",
    "picard_shss_solve",
    "picard_solve",
    "residual",
    "solve",
    "spectral_bounds",
    "split_symmetric",
]
