from __future__ import annotations

import numpy as np
from statsmodels.stats.multitest import multipletests

from src.models import Correction


def _validated(p_raw) -> np.ndarray:
    values = np.asarray(p_raw, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("need at least one p-value")
    if np.any(np.isnan(values)) or np.any(values < 0) or np.any(values > 1):
        raise ValueError("p-values must lie in [0, 1]")
    return values


def adjust_by(p_raw) -> np.ndarray:
    """Benjamini-Yekutieli step-up adjustment, input order preserved."""
    values = _validated(p_raw)
    return multipletests(values, method="fdr_by")[1]


def adjust_holm(p_raw) -> np.ndarray:
    """Holm step-down adjustment, input order preserved."""
    values = _validated(p_raw)
    return multipletests(values, method="holm")[1]


def adjust(p_raw, correction: Correction) -> np.ndarray:
    if correction == Correction.BY:
        adjusted = adjust_by(p_raw)
    elif correction == Correction.HOLM:
        adjusted = adjust_holm(p_raw)
    else:
        adjusted = _validated(p_raw).copy()
    # guard against round-off pulling an adjusted value under its raw value
    return np.maximum(adjusted, np.asarray(p_raw, dtype=float).ravel())
