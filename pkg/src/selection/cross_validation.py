from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.model_selection import KFold

from src.errors import DegenerateFitError, GraceError, SelectionError
from src.grace.estimator import fit
from src.grace.methods import method_penalty, method_plan, ridge_spec
from src.models import (
    CvPlan,
    CvRecord,
    CvResult,
    GracePenaltySpec,
    Method,
    PenaltyMatrix,
    RegressionData,
    Standardization,
)
from src.solvers.lasso import lambda_max, lasso
from src.solvers.standardize import standardize
from src.utils.logging import get_logger
from src.utils.parallel import run_ordered

logger = get_logger("selection.cross_validation")

DEFAULT_GRID = tuple(float(v) for v in np.logspace(-2, 6, 20))
LASSO_GRID_SIZE = 20
LASSO_GRID_RATIO = 1e-3

Fold = Tuple[RegressionData, Standardization, np.ndarray, np.ndarray]


def default_plan(seed: int = 0, folds: int = 10) -> CvPlan:
    return CvPlan(folds=folds, grid_g=DEFAULT_GRID, grid_2=DEFAULT_GRID, seed=seed)


def fold_indices(n: int, folds: int, seed: int) -> List[np.ndarray]:
    """Held-out index sets from a seeded shuffle; sizes differ by at most one."""
    if not 2 <= folds <= n:
        raise ValueError(f"fold count must lie in [2, n={n}], got {folds}")
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed % 2**32)
    return [test for _, test in splitter.split(np.zeros((n, 1)))]


def build_folds(data: RegressionData, plan: CvPlan) -> List[Fold]:
    """Training folds re-standardized; held-out rows kept on the input scale."""
    folds: List[Fold] = []
    everything = np.arange(data.n)
    for number, test in enumerate(fold_indices(data.n, plan.folds, plan.seed), start=1):
        train = np.setdiff1d(everything, test)
        try:
            train_data, constants = standardize(data.X[train], data.y[train])
        except DegenerateFitError as exc:
            raise SelectionError(f"fold {number}: {exc}") from exc
        folds.append((train_data, constants, data.X[test], data.y[test]))
    return folds


def held_out_sse(constants: Standardization, beta: np.ndarray, X_test: np.ndarray, y_test: np.ndarray) -> float:
    predicted = constants.transform_x(X_test) @ beta + constants.y_center
    residual = y_test - predicted
    return float(residual @ residual)


def _grid_point_error(task: Tuple[Sequence[Fold], Optional[PenaltyMatrix], float, float]) -> float:
    folds, penalty, h_g, h_2 = task
    spec = GracePenaltySpec(penalty=penalty if h_g > 0 else None, h_g=h_g, h_2=h_2)
    total = 0.0
    for train_data, constants, X_test, y_test in folds:
        try:
            beta = fit(train_data, spec).beta_hat
        except GraceError:
            return math.inf
        total += held_out_sse(constants, beta, X_test, y_test)
    return total


def cross_validate(
    data: RegressionData,
    penalty: Optional[PenaltyMatrix],
    plan: CvPlan,
    threads: int = 1,
) -> CvResult:
    """K-fold CV over the (h_g, h_2) product grid using held-out prediction SSE."""
    folds = build_folds(data, plan)
    points = [(h_g, h_2) for h_g in plan.grid_g for h_2 in plan.grid_2]
    errors = run_ordered(
        _grid_point_error,
        [(folds, penalty, h_g, h_2) for h_g, h_2 in points],
        threads=threads,
    )
    table = [CvRecord(h_g=h_g, h_2=h_2, cv_error=err) for (h_g, h_2), err in zip(points, errors)]
    feasible = [record for record in table if math.isfinite(record.cv_error)]
    failed = len(table) - len(feasible)
    if not feasible:
        raise SelectionError(f"all {len(table)} grid points failed to fit")
    warnings: List[str] = []
    if failed:
        message = f"{failed} of {len(table)} grid points failed to fit and were skipped"
        warnings.append(message)
        logger.warning(message)
    best = min(feasible, key=lambda r: (r.cv_error, -r.h_g, -r.h_2))
    logger.info("CV selected h_g=%.4g h_2=%.4g (error %.6g)", best.h_g, best.h_2, best.cv_error)
    return CvResult(
        h_g=best.h_g,
        h_2=best.h_2,
        cv_error=best.cv_error,
        table=table,
        failed_points=failed,
        warnings=warnings,
    )


def cv_table_frame(result: CvResult) -> pd.DataFrame:
    return pd.DataFrame(
        [{"h_G": r.h_g, "h_2": r.h_2, "cv_error": r.cv_error} for r in result.table],
        columns=["h_G", "h_2", "cv_error"],
    )


def lasso_cv_error(data: RegressionData, plan: CvPlan, lambdas: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    """Best (lambda, held-out SSE) for the lasso over a decreasing warm-started grid."""
    if lambdas is None:
        top = lambda_max(data)
        lambdas = np.geomspace(top, top * LASSO_GRID_RATIO, LASSO_GRID_SIZE)
    lambdas = sorted((float(v) for v in lambdas), reverse=True)
    totals = np.zeros(len(lambdas))
    for train_data, constants, X_test, y_test in build_folds(data, plan):
        beta = None
        for idx, lam in enumerate(lambdas):
            beta = lasso(train_data, lam, beta_init=beta).beta
            totals[idx] += held_out_sse(constants, beta, X_test, y_test)
    best = int(np.argmin(totals))
    return lambdas[best], float(totals[best])


def compare_prediction(
    data: RegressionData,
    penalty: PenaltyMatrix,
    plan: CvPlan,
    threads: int = 1,
    methods: Sequence[Method] = (Method.GRACE, Method.GRACER, Method.GRACEI, Method.RIDGE),
    include_lasso: bool = True,
) -> Dict[str, float]:
    """Held-out prediction SSE per method, tuned methods at their CV optimum."""
    errors: Dict[str, float] = {}
    for method in methods:
        method_grid = method_plan(method, plan)
        if method_grid is None:
            spec = ridge_spec()
            errors[method.value] = _grid_point_error((build_folds(data, plan), None, spec.h_g, spec.h_2))
            continue
        result = cross_validate(data, method_penalty(method, penalty), method_grid, threads)
        errors[method.value] = result.cv_error
    if include_lasso:
        _, errors["lasso"] = lasso_cv_error(data, plan)
    return errors
