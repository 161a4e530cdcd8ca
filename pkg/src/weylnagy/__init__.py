"""Fourier-sum deviations on Weyl-Nagy classes: exact oracles and asymptotic estimates."""

from .errors import AccuracyError, ConsistencyError, DomainError, ResourceError, WeylNagyError
from .kernels import ClassParams, Metric, TailKernel
from .oracle import NormalizedDeviation, exact_deviation

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ClassParams",
    "ConsistencyError",
    "DomainError",
    "Metric",
    "NormalizedDeviation",
    "ResourceError",
    "TailKernel",
    "WeylNagyError",
    "exact_deviation",
    "__version__",
]
