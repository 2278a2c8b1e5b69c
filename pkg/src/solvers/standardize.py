from __future__ import annotations

from typing import Tuple

import numpy as np

from src.errors import DegenerateFitError, DimensionError
from src.models import RegressionData, Standardization

ZERO_VARIANCE_TOLERANCE = 1e-12


def standardize(X_raw: np.ndarray, y_raw: np.ndarray) -> Tuple[RegressionData, Standardization]:
    """Center y and the columns of X, scaling each column so that x_j'x_j = n."""
    X_raw = np.asarray(X_raw, dtype=float)
    y_raw = np.ravel(np.asarray(y_raw, dtype=float))
    if X_raw.ndim != 2:
        raise DimensionError(f"design must be a matrix, got shape {X_raw.shape}")
    n = X_raw.shape[0]
    if n < 2:
        raise DimensionError(f"need at least 2 samples, got {n}")
    if y_raw.shape[0] != n:
        raise DimensionError(f"X has {n} rows but y has {y_raw.shape[0]} entries")

    x_center = X_raw.mean(axis=0)
    centered = X_raw - x_center
    x_scale = np.sqrt((centered**2).sum(axis=0) / n)
    reference = np.maximum(np.abs(x_center), 1.0)
    flat = np.flatnonzero(x_scale <= ZERO_VARIANCE_TOLERANCE * reference)
    if flat.size:
        listed = ", ".join(str(j + 1) for j in flat[:10])
        raise DegenerateFitError(f"zero-variance column(s): {listed}")

    constants = Standardization(
        x_center=x_center, x_scale=x_scale, y_center=float(y_raw.mean())
    )
    data = RegressionData(
        X=centered / x_scale, y=y_raw - constants.y_center, standardized=True
    )
    return data, constants


def check_standardized(data: RegressionData) -> bool:
    n = data.n
    y_norm = max(float(np.linalg.norm(data.y)), 1.0)
    if abs(float(data.y.sum())) > 1e-8 * y_norm:
        return False
    if np.any(np.abs(data.X.sum(axis=0)) > 1e-8 * n):
        return False
    return bool(np.all(np.abs((data.X**2).sum(axis=0) - n) <= 1e-6 * n))
