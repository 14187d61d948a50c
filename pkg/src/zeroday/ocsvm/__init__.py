from .kernel import KernelKind, KernelRows, KernelSpec, rbf_kernel, rbf_matrix
from .model import (
    Membership,
    OneClassSvmModel,
    decision_function,
    detect_rate,
    predict,
    predict_batch,
)
from .reference import project_capped_simplex, solve_dual_reference
from .smo import SmoConfig, fit

__all__ = [
    "KernelKind",
    "KernelRows",
    "KernelSpec",
    "Membership",
    "OneClassSvmModel",
    "SmoConfig",
    "decision_function",
    "detect_rate",
    "fit",
    "predict",
    "predict_batch",
    "project_capped_simplex",
    "rbf_kernel",
    "rbf_matrix",
    "solve_dual_reference",
]
