from __future__ import annotations

from typing import Optional


class GraceError(Exception):
    """Base class for library errors."""


class GraphError(GraceError):
    """Raised for invalid graphs or infeasible perturbations."""


class DimensionError(GraceError):
    """Raised when array shapes disagree."""


class SingularSystemError(GraceError):
    """Raised when the penalized system is not numerically positive definite."""

    def __init__(self, message: str, smallest_pivot: Optional[float] = None):
        if smallest_pivot is not None:
            message = (
                f"{message} (smallest pivot {smallest_pivot:.6e}); "
                "consider adding diagonal jitter to the penalty matrix"
            )
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class DegenerateFitError(GraceError):
    """Raised for zero-variance columns or a collapsing noise estimate."""


class SelectionError(GraceError):
    """Raised when no cross-validation grid point can be fitted."""


class StudyAbortedError(GraceError):
    """Raised when too many simulation replicates fail."""
