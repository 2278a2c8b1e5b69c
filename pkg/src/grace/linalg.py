from __future__ import annotations

import threading
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, ldl

from src.errors import SingularSystemError

PIVOT_TOLERANCE = 1e-10
POWER_ITERATIONS = 500
POWER_TOLERANCE = 1e-12


def _ldl_smallest_pivot(matrix: np.ndarray) -> float:
    _, block_diagonal, _ = ldl(matrix)
    return float(np.linalg.eigvalsh(block_diagonal).min())


class SystemFactor:
    """Cholesky factorization of a symmetric positive definite system.

    Construction fails with ``SingularSystemError`` when the smallest pivot is
    at or below ``PIVOT_TOLERANCE * trace / p``. Solves are read-only and may
    run concurrently; the dense inverse is computed once on demand.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        self.dim = matrix.shape[0]
        self.trace = float(np.trace(matrix))
        threshold = PIVOT_TOLERANCE * abs(self.trace) / max(self.dim, 1)
        try:
            self._factor = cho_factor(matrix, lower=True, check_finite=True)
        except LinAlgError:
            raise SingularSystemError(
                "penalized system is not positive definite",
                smallest_pivot=_ldl_smallest_pivot(matrix),
            ) from None
        pivots = np.diag(self._factor[0]) ** 2
        self.smallest_pivot = float(pivots.min())
        if self.smallest_pivot <= threshold:
            raise SingularSystemError(
                "penalized system is numerically singular",
                smallest_pivot=self.smallest_pivot,
            )
        self._matrix = matrix
        self._inverse: Optional[np.ndarray] = None
        self._lock = threading.Lock()

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._factor, rhs, check_finite=False)

    def inverse(self) -> np.ndarray:
        with self._lock:
            if self._inverse is None:
                inverse = self.solve(np.eye(self.dim))
                inverse = 0.5 * (inverse + inverse.T)
                inverse.setflags(write=False)
                self._inverse = inverse
        return self._inverse

    def smallest_eigenvalue(self) -> float:
        """Smallest eigenvalue by inverse power iteration with a Rayleigh quotient."""
        vector = np.linspace(1.0, 2.0, self.dim)
        vector /= np.linalg.norm(vector)
        estimate = float(vector @ self._matrix @ vector)
        for _ in range(POWER_ITERATIONS):
            nxt = self.solve(vector)
            nxt /= np.linalg.norm(nxt)
            updated = float(nxt @ self._matrix @ nxt)
            vector = nxt
            if abs(updated - estimate) <= POWER_TOLERANCE * max(abs(updated), 1e-300):
                estimate = updated
                break
            estimate = updated
        return estimate
