"""Kernel-based numerical differentiation stencils with certified error bounds."""

__version__ = "0.1.0"

from .accuracy import (
    NativeTestFunction,
    PowerReport,
    differentiation_error,
    power_function,
    quadratic_form,
    random_native_test_function,
)
from .bounds import (
    BoundReport,
    HolderEstimate,
    assemble_error_bound,
    assemble_integer_order_bound,
    cdr_constant,
    mixed_kernel_seminorm_estimate,
    phi_holder_seminorm,
)
from .convergence import ConvergenceReport, TestFunction, run_convergence
from .errors import (
    ConfigError,
    ExactnessError,
    InconsistentMomentsError,
    SingularSystemError,
    SmoothnessError,
    StencilCertError,
)
from .geometry import PointSet, enumerate_multi_indices, read_points_csv
from .growth import GrowthResult, growth_dual, growth_primal
from .kernels import DiffOperator, KernelSpec, kernel_matrix, kernel_partial
from .polyspace import PolyBasis, operator_moments, vandermonde
from .stencil import StencilProblem, StencilResult, check_consistency, compute_weights

__all__ = [
    "BoundReport", "ConfigError", "ConvergenceReport", "DiffOperator", "ExactnessError",
    "GrowthResult", "HolderEstimate", "InconsistentMomentsError", "KernelSpec",
    "NativeTestFunction", "PointSet", "PolyBasis", "PowerReport", "SingularSystemError",
    "SmoothnessError", "StencilCertError", "StencilProblem", "StencilResult", "TestFunction",
    "assemble_error_bound", "assemble_integer_order_bound", "cdr_constant",
    "check_consistency", "compute_weights", "differentiation_error", "enumerate_multi_indices",
    "growth_dual", "growth_primal", "kernel_matrix", "kernel_partial",
    "mixed_kernel_seminorm_estimate", "operator_moments", "phi_holder_seminorm",
    "power_function", "quadratic_form", "random_native_test_function", "read_points_csv",
    "run_convergence", "vandermonde",
]
