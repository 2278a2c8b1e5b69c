from __future__ import annotations

import math
from typing import Optional

import numpy as np

from src.errors import DegenerateFitError
from src.models import NoiseEstimate, RegressionData
from src.solvers.lasso import lasso
from src.utils.logging import get_logger

logger = get_logger("solvers.scaled_lasso")

SIGMA_TOLERANCE = 1e-8
MAX_ITERATIONS = 100
SIGMA_FLOOR = 1e-12


def default_lambda0(n: int, p: int) -> float:
    """Universal penalty level 2 * sqrt(2 log p / n) on the (1/n)-scaled objective."""
    return 2.0 * math.sqrt(2.0 * math.log(max(p, 2)) / n)


def scaled_lasso(
    data: RegressionData,
    lambda0: Optional[float] = None,
    tol: float = SIGMA_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> NoiseEstimate:
    """Alternate a lasso at ``lambda0 * sigma`` with sigma = ||y - Xb|| / sqrt(n)."""
    if lambda0 is None:
        lambda0 = default_lambda0(data.n, data.p)
    if lambda0 <= 0:
        raise ValueError(f"lambda0 must be positive, got {lambda0}")

    root_n = math.sqrt(data.n)
    sigma = float(np.linalg.norm(data.y)) / root_n
    if sigma < SIGMA_FLOOR:
        raise DegenerateFitError("response is identically zero; noise level is not estimable")

    beta = np.zeros(data.p)
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        fit = lasso(data, lambda0 * sigma, beta_init=beta)
        beta = np.array(fit.beta)
        updated = float(np.linalg.norm(data.y - data.X @ beta)) / root_n
        if updated < SIGMA_FLOOR:
            raise DegenerateFitError(
                f"noise estimate collapsed to {updated:.3e}; the lasso interpolates the response"
            )
        change = abs(updated - sigma)
        sigma = updated
        if change < tol:
            converged = True
            break

    if not converged:
        logger.warning("Scaled lasso stopped after %d iterations without converging", iterations)
    logger.debug("Scaled lasso sigma=%.6g after %d iterations", sigma, iterations)
    return NoiseEstimate(
        sigma=sigma,
        beta=beta,
        lambda0=lambda0,
        iterations=iterations,
        converged=converged,
    )
