"""Regularized first-order traces for n-th order operators with two-point boundary conditions."""
from .bc_model import (BCClass, BoundaryConditionError, BoundaryConditionSet, classify,
                       normalize, parse_bc)
from ._kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "BCClass", "BoundaryConditionError", "BoundaryConditionSet", "classify", "normalize",
    "parse_bc", "KERNEL_BACKEND",
]
__version__ = "0.1.0"
