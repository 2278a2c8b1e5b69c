import numpy as np
import pytest

from src.errors import SelectionError
from src.graph.laplacian import laplacian
from src.models import CvPlan, WeightedGraph
from src.selection.cross_validation import (
    DEFAULT_GRID,
    compare_prediction,
    cross_validate,
    cv_table_frame,
    default_plan,
    fold_indices,
    lasso_cv_error,
)
from src.solvers.standardize import standardize


def sample_data(n: int = 40, p: int = 6, seed: int = 0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:2] = [1.0, 0.8]
    data, _ = standardize(X, X @ beta + 0.5 * rng.standard_normal(n))
    return data


def chain_penalty(p: int):
    return laplacian(
        WeightedGraph(num_nodes=p, edges=tuple((j, j + 1, 1.0) for j in range(p - 1))),
        jitter=0.01,
    )


def test_fold_indices_partition_rows():
    folds = fold_indices(23, 5, seed=4)
    sizes = sorted(len(f) for f in folds)
    assert sizes[-1] - sizes[0] <= 1
    assert sorted(np.concatenate(folds).tolist()) == list(range(23))
    assert all(np.array_equal(a, b) for a, b in zip(folds, fold_indices(23, 5, seed=4)))


def test_fold_indices_rejects_bad_counts():
    with pytest.raises(ValueError):
        fold_indices(5, 6, seed=0)
    with pytest.raises(ValueError):
        CvPlan(folds=1, grid_g=(1.0,), grid_2=(1.0,))


def test_plan_grid_validation():
    with pytest.raises(ValueError):
        CvPlan(grid_g=(10.0, 1.0), grid_2=(1.0,))
    with pytest.raises(ValueError):
        CvPlan(grid_g=(), grid_2=(1.0,))
    with pytest.raises(ValueError):
        CvPlan(grid_g=(-1.0,), grid_2=(1.0,))


def test_default_plan_grid():
    plan = default_plan(seed=3)
    assert plan.grid_g == DEFAULT_GRID
    assert len(DEFAULT_GRID) == 20
    assert DEFAULT_GRID[0] == pytest.approx(1e-2)
    assert DEFAULT_GRID[-1] == pytest.approx(1e6)


def test_single_point_grid_is_returned():
    data = sample_data()
    plan = CvPlan(folds=5, grid_g=(3.0,), grid_2=(0.5,), seed=1)
    result = cross_validate(data, chain_penalty(data.p), plan)
    assert (result.h_g, result.h_2) == (3.0, 0.5)
    assert len(result.table) == 1
    assert result.failed_points == 0


def test_duplicated_grid_points_tie_deterministically():
    data = sample_data()
    plan = CvPlan(folds=5, grid_g=(2.0, 2.0), grid_2=(1.0,), seed=1)
    result = cross_validate(data, chain_penalty(data.p), plan)
    errors = [record.cv_error for record in result.table]
    assert errors[0] == errors[1]
    assert result.h_g == 2.0


def test_cv_is_deterministic_across_thread_counts():
    data = sample_data()
    plan = CvPlan(folds=5, grid_g=(0.1, 10.0, 1000.0), grid_2=(0.1, 10.0), seed=9)
    penalty = chain_penalty(data.p)
    sequential = cross_validate(data, penalty, plan, threads=1)
    parallel = cross_validate(data, penalty, plan, threads=2)
    assert [r.cv_error for r in sequential.table] == [r.cv_error for r in parallel.table]
    assert (sequential.h_g, sequential.h_2) == (parallel.h_g, parallel.h_2)


def test_failed_points_are_skipped_with_warning():
    data = sample_data(n=20, p=30)
    plan = CvPlan(folds=4, grid_g=(0.0,), grid_2=(0.0, 1.0), seed=2)
    result = cross_validate(data, None, plan)
    assert result.failed_points == 1
    assert result.h_2 == 1.0
    assert result.warnings
    assert np.isinf(result.table[0].cv_error)


def test_all_points_failing_raises():
    data = sample_data(n=20, p=30)
    plan = CvPlan(folds=4, grid_g=(0.0,), grid_2=(0.0,), seed=2)
    with pytest.raises(SelectionError):
        cross_validate(data, None, plan)


def test_cv_table_frame_columns():
    data = sample_data()
    plan = CvPlan(folds=4, grid_g=(1.0, 10.0), grid_2=(0.1,), seed=0)
    frame = cv_table_frame(cross_validate(data, chain_penalty(data.p), plan))
    assert list(frame.columns) == ["h_G", "h_2", "cv_error"]
    assert len(frame) == 2


def test_lasso_cv_error_and_prediction_comparison():
    data = sample_data()
    plan = CvPlan(folds=4, grid_g=(0.1, 10.0), grid_2=(0.1, 10.0), seed=5)
    lam, error = lasso_cv_error(data, plan)
    assert lam > 0
    assert error > 0
    errors = compare_prediction(data, chain_penalty(data.p), plan)
    assert set(errors) == {"grace", "gracer", "gracei", "ridge", "lasso"}
    assert all(np.isfinite(value) and value > 0 for value in errors.values())
