from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.stats import norm

from src.errors import DimensionError
from src.grace.estimator import penalty_times
from src.models import BoundVariant, FitResult, TestConfig

DEFAULT_XI = 0.05
DEFAULT_ALPHA = 0.05


def grace_statistic(fit: FitResult, beta_tilde: np.ndarray) -> np.ndarray:
    """z = beta_hat + A^-1 M beta_tilde."""
    beta_tilde = np.asarray(beta_tilde, dtype=float)
    if beta_tilde.shape != (fit.p,):
        raise DimensionError(
            f"initial estimate has shape {beta_tilde.shape}, expected ({fit.p},)"
        )
    correction = fit.factor.solve(penalty_times(fit, beta_tilde))
    return fit.beta_hat + correction


def rate_factor(n: int, p: int, xi: float) -> float:
    """(log p / n)^(1/2 - xi); no flooring, so it may exceed 1 when log p > n."""
    if p < 1 or n < 1:
        raise ValueError(f"rate factor needs n, p >= 1, got n={n}, p={p}")
    return (math.log(p) / n) ** (0.5 - xi)


def bias_matrix(fit: FitResult) -> np.ndarray:
    """B = A^-1 M."""
    return fit.factor.inverse() @ fit.spec.effective_matrix(fit.p)


def gamma_bound(
    fit: FitResult,
    config: TestConfig,
    n: int,
    p: int,
    sigma: Optional[float] = None,
) -> np.ndarray:
    """Row-wise sup norm of A^-1 M, diagonal excluded for the offdiag variant, times the rate factor."""
    if p != fit.p:
        raise DimensionError(f"p={p} does not match fit with p={fit.p}")
    rows = np.abs(bias_matrix(fit))
    if config.bound_variant == BoundVariant.OFFDIAG:
        rows[np.diag_indices_from(rows)] = 0.0
    gamma = rows.max(axis=1) * rate_factor(n, p, config.xi)
    if config.scale_invariant:
        sigma = fit.sigma_eps if sigma is None else sigma
        if sigma is None:
            raise ValueError("scale-invariant bounds need a noise level")
        gamma = gamma * sigma
    return gamma


def p_values(z: np.ndarray, gamma: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """Two-sided P_j = 2 (1 - Phi((|z_j| - Gamma_j)_+ / sd_j))."""
    z = np.asarray(z, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if not (z.shape == gamma.shape == sd.shape):
        raise DimensionError(
            f"shapes differ: z {z.shape}, gamma {gamma.shape}, sd {sd.shape}"
        )
    if np.any(~(sd > 0)):
        raise ValueError("standard deviations must be positive")
    excess = np.maximum(np.abs(z) - gamma, 0.0)
    return np.minimum(2.0 * norm.sf(excess / sd), 1.0)
