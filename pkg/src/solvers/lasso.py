from __future__ import annotations

import math
from typing import Iterable, List, Optional, Tuple

import numpy as np

from src.models import LassoFit, RegressionData
from src.utils.logging import get_logger

logger = get_logger("solvers.lasso")

COEFFICIENT_TOLERANCE = 1e-7
KKT_TOLERANCE = 1e-6
MAX_SWEEPS = 10_000


def soft_threshold(value, threshold: float):
    return np.sign(value) * np.maximum(np.abs(value) - threshold, 0.0)


def default_lasso_lambda(sigma_hat: float, n: int, p: int) -> float:
    """4 * sigma * sqrt(3 log p / n)."""
    if n < 2 or p < 2:
        raise ValueError(f"default lambda needs n >= 2 and p >= 2, got n={n}, p={p}")
    return 4.0 * sigma_hat * math.sqrt(3.0 * math.log(p) / n)


def lambda_max(data: RegressionData) -> float:
    """Smallest lambda giving the all-zero solution."""
    return float(2.0 * np.max(np.abs(data.X.T @ data.y)) / data.n)


class _CovarianceDescent:
    """Cyclic coordinate descent on (1/n)||y - Xb||^2 + lam * ||b||_1 using Gram updates."""

    def __init__(self, data: RegressionData, lam: float, beta: np.ndarray):
        self.gram = data.gram() / data.n
        self.corr = data.X.T @ data.y / data.n
        self.y_energy = float(data.y @ data.y) / data.n
        self.lam = lam
        self.beta = beta
        self.fitted = self.gram @ beta
        self.diag = np.diag(self.gram).copy()

    def sweep(self, indices: Iterable[int]) -> float:
        largest = 0.0
        half = 0.5 * self.lam
        for j in indices:
            if self.diag[j] <= 0:
                continue
            old = self.beta[j]
            rho = self.corr[j] - (self.fitted[j] - self.diag[j] * old)
            if rho > half:
                new = (rho - half) / self.diag[j]
            elif rho < -half:
                new = (rho + half) / self.diag[j]
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                self.beta[j] = new
                self.fitted += self.gram[:, j] * delta
                largest = max(largest, abs(delta))
        return largest

    def objective(self) -> float:
        return float(
            self.beta @ self.fitted
            - 2.0 * self.corr @ self.beta
            + self.y_energy
            + self.lam * np.abs(self.beta).sum()
        )


def lasso(
    data: RegressionData,
    lam: float,
    beta_init: Optional[np.ndarray] = None,
    tol: float = COEFFICIENT_TOLERANCE,
    max_sweeps: int = MAX_SWEEPS,
) -> LassoFit:
    """Lasso with objective (1/n)||y - Xb||^2 + lam * ||b||_1.

    Full sweeps alternate with cycling over the current active set; convergence
    is declared only after a full sweep moves no coefficient by ``tol`` or more.
    """
    if lam < 0 or math.isnan(lam):
        raise ValueError(f"lasso lambda must be nonnegative, got {lam}")
    beta = np.zeros(data.p) if beta_init is None else np.array(beta_init, dtype=float)
    solver = _CovarianceDescent(data, lam, beta)
    trace: List[float] = []
    sweeps = 0
    converged = False
    everything = range(data.p)

    while sweeps < max_sweeps:
        change = solver.sweep(everything)
        sweeps += 1
        trace.append(solver.objective())
        if change < tol:
            converged = True
            break
        while sweeps < max_sweeps:
            active = np.flatnonzero(solver.beta)
            change = solver.sweep(active)
            sweeps += 1
            trace.append(solver.objective())
            if change < tol:
                break

    if not converged:
        logger.warning("Lasso did not converge in %d sweeps (lambda=%.4g)", sweeps, lam)
    else:
        logger.debug("Lasso converged in %d sweeps (lambda=%.4g)", sweeps, lam)
    return LassoFit(
        beta=solver.beta,
        lam=lam,
        iterations=sweeps,
        converged=converged,
        objective_trace=tuple(trace),
    )


def lasso_objective(data: RegressionData, beta: np.ndarray, lam: float) -> float:
    residual = data.y - data.X @ beta
    return float(residual @ residual / data.n + lam * np.abs(beta).sum())


def kkt_violation(data: RegressionData, beta: np.ndarray, lam: float) -> float:
    """Largest breach of the coordinate-wise stationarity conditions."""
    gradient = 2.0 * data.X.T @ (data.y - data.X @ beta) / data.n
    active = beta != 0
    breach = np.where(
        active,
        np.abs(gradient - lam * np.sign(beta)),
        np.maximum(np.abs(gradient) - lam, 0.0),
    )
    return float(breach.max()) if breach.size else 0.0


def check_kkt(data: RegressionData, fit: LassoFit, tol: float = KKT_TOLERANCE) -> bool:
    return kkt_violation(data, fit.beta, fit.lam) <= tol


def lasso_path(data: RegressionData, lambdas: Iterable[float]) -> List[Tuple[float, LassoFit]]:
    """Fits along ``lambdas`` in decreasing order, each warm-started from the previous."""
    fits: List[Tuple[float, LassoFit]] = []
    beta = None
    for lam in sorted(lambdas, reverse=True):
        fit = lasso(data, lam, beta_init=beta)
        beta = fit.beta
        fits.append((lam, fit))
    return fits
