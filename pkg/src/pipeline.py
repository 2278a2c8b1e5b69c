"""End-to-end testing: noise level, initial estimate, tuning, statistics and p-values."""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import GraceError, SelectionError
from src.grace.estimator import fit, statistic_covariance_diag
from src.grace.methods import RIDGE_H2, method_penalty, method_plan, ridge_spec
from src.inference.report import build_report
from src.inference.statistics import gamma_bound, grace_statistic
from src.models import (
    CvPlan,
    CvResult,
    GracePenaltySpec,
    GraceTestRun,
    InitialEstimates,
    Method,
    PenaltyMatrix,
    RegressionData,
    TestConfig,
    TestReport,
)
from src.selection.cross_validation import cross_validate
from src.solvers.lasso import default_lasso_lambda, lasso
from src.solvers.scaled_lasso import scaled_lasso
from src.utils.logging import get_logger

logger = get_logger("pipeline")


def initial_estimates(data: RegressionData, lambda0: Optional[float] = None) -> InitialEstimates:
    """Scaled-lasso noise level, then the lasso at 4 * sigma * sqrt(3 log p / n)."""
    noise = scaled_lasso(data, lambda0)
    lasso_lambda = default_lasso_lambda(noise.sigma, data.n, data.p)
    initial = lasso(data, lasso_lambda, beta_init=noise.beta)
    logger.info(
        "Noise level %.6g; lasso lambda %.6g with %d nonzero coefficients",
        noise.sigma,
        lasso_lambda,
        int(np.count_nonzero(initial.beta)),
    )
    return InitialEstimates(
        sigma=noise.sigma,
        beta_tilde=initial.beta,
        lasso_lambda=lasso_lambda,
        lambda0=noise.lambda0,
    )


def evaluate_at(
    data: RegressionData,
    method: Method,
    penalty: Optional[PenaltyMatrix],
    h_g: float,
    h_2: float,
    initial: InitialEstimates,
    config: TestConfig,
    covariates: Optional[Sequence[str]] = None,
    warnings: Optional[List[str]] = None,
) -> TestReport:
    """Test every covariate at fixed tuning parameters."""
    if method == Method.RIDGE:
        spec = ridge_spec()
        result = fit(data, spec, sigma_eps=initial.sigma)
        z = np.array(result.beta_hat)
        gamma = np.zeros(data.p)
    else:
        spec = GracePenaltySpec(penalty=penalty if h_g > 0 else None, h_g=h_g, h_2=h_2)
        result = fit(data, spec, sigma_eps=initial.sigma)
        z = grace_statistic(result, initial.beta_tilde)
        gamma = gamma_bound(result, config, data.n, data.p)
    sd = np.sqrt(statistic_covariance_diag(result, data))
    return build_report(
        method,
        z,
        gamma,
        sd,
        config,
        sigma_used=initial.sigma,
        covariates=covariates,
        h_g=spec.h_g,
        h_2=spec.h_2,
        warnings=warnings,
    )


def _fallback_order(cv: CvResult, plan: CvPlan) -> List[Tuple[float, float]]:
    """Feasible grid points ordered by grid distance from the CV choice."""
    g_index = {value: idx for idx, value in enumerate(plan.grid_g)}
    t_index = {value: idx for idx, value in enumerate(plan.grid_2)}
    chosen = (g_index[cv.h_g], t_index[cv.h_2])
    feasible = {(r.h_g, r.h_2) for r in cv.table if np.isfinite(r.cv_error)}
    return sorted(
        feasible,
        key=lambda point: (
            abs(g_index[point[0]] - chosen[0]) + abs(t_index[point[1]] - chosen[1]),
            -point[0],
            -point[1],
        ),
    )


def run_grace_test(
    data: RegressionData,
    method: Method,
    penalty: Optional[PenaltyMatrix],
    config: TestConfig,
    plan: CvPlan,
    covariates: Optional[Sequence[str]] = None,
    jitter: Optional[float] = None,
    threads: int = 1,
    initial: Optional[InitialEstimates] = None,
) -> GraceTestRun:
    """CV-tune ``method`` (ridge stays at h_2 = 1) and test all covariates."""
    if initial is None:
        initial = initial_estimates(data)
    used_penalty = method_penalty(method, penalty, jitter)
    method_grid = method_plan(method, plan)
    if method_grid is None:
        report = evaluate_at(data, method, None, 0.0, RIDGE_H2, initial, config, covariates)
        return GraceTestRun(report=report, initial=initial, cv=None)

    cv = cross_validate(data, used_penalty, method_grid, threads)
    warnings = list(cv.warnings)
    for h_g, h_2 in _fallback_order(cv, method_grid):
        try:
            report = evaluate_at(
                data, method, used_penalty, h_g, h_2, initial, config, covariates, warnings
            )
        except GraceError as exc:
            message = f"fit at h_g={h_g:.4g}, h_2={h_2:.4g} failed ({exc}); trying the next grid point"
            logger.warning(message)
            warnings.append(message)
            continue
        return GraceTestRun(report=report, initial=initial, cv=cv)
    raise SelectionError(f"no grid point could be fitted on the full data for {method.value}")
