import math

import numpy as np
import pytest

from src.errors import SingularSystemError
from src.grace.estimator import bias_bound, fit, fit_path, statistic_covariance_diag, system_matrix
from src.grace.linalg import SystemFactor
from src.grace.methods import method_penalty, method_plan, ridge_spec
from src.graph.laplacian import custom_penalty, laplacian
from src.inference.statistics import grace_statistic
from src.models import CvPlan, GracePenaltySpec, Method, PenaltyKind, RegressionData, WeightedGraph


def orthogonal_design(n: int, p: int, seed: int = 0) -> np.ndarray:
    """Columns with x_j'x_k = n * delta_jk."""
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))
    return math.sqrt(n) * q


def correlated_pair(n: int, rho: float, seed: int = 0) -> np.ndarray:
    """Two columns with x_j'x_j = n and x_1'x_2 = n * rho."""
    base = orthogonal_design(n, 2, seed)
    return np.column_stack([base[:, 0], rho * base[:, 0] + math.sqrt(1 - rho**2) * base[:, 1]])


def pair_penalty(l: float):
    return custom_penalty(np.array([[1.0, l], [l, 1.0]]))


def test_ridge_type_fit_on_orthogonal_design():
    n, h = 40, 7.0
    X = orthogonal_design(n, 3)
    y = np.random.default_rng(1).standard_normal(n)
    result = fit(RegressionData(X=X, y=y), GracePenaltySpec(h_2=h))
    assert result.beta_hat == pytest.approx(X.T @ y / (n + h))


def test_unpenalized_fit_is_least_squares():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((20, 3))
    y = rng.standard_normal(20)
    result = fit(RegressionData(X=X, y=y), GracePenaltySpec())
    assert result.beta_hat == pytest.approx(np.linalg.lstsq(X, y, rcond=None)[0])
    assert result.residual <= 1e-8


def test_two_covariate_fit_matches_explicit_inverse():
    n, rho, h = 50, 0.5, 50.0
    X = correlated_pair(n, rho)
    y = X @ np.array([1.0, -0.5]) + np.random.default_rng(3).standard_normal(n)
    penalty = pair_penalty(-0.5)
    result = fit(RegressionData(X=X, y=y), GracePenaltySpec(penalty=penalty, h_g=h))
    system = n * np.array([[1.0, rho], [rho, 1.0]]) + h * penalty.entries
    assert result.beta_hat == pytest.approx(np.linalg.inv(system) @ X.T @ y, rel=1e-10)


def test_singular_system_names_pivot_and_jitter():
    rng = np.random.default_rng(4)
    data = RegressionData(X=rng.standard_normal((3, 5)), y=rng.standard_normal(3))
    with pytest.raises(SingularSystemError, match="jitter"):
        fit(data, GracePenaltySpec())


def test_system_factor_inverse_and_eigenvalue():
    matrix = np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]])
    factor = SystemFactor(matrix)
    assert factor.inverse() == pytest.approx(np.linalg.inv(matrix))
    assert factor.smallest_eigenvalue() == pytest.approx(np.linalg.eigvalsh(matrix)[0], rel=1e-8)
    assert factor.solve(np.ones(3)) == pytest.approx(np.linalg.solve(matrix, np.ones(3)))


def test_system_factor_rejects_indefinite():
    with pytest.raises(SingularSystemError) as excinfo:
        SystemFactor(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert excinfo.value.smallest_pivot is not None


def test_statistic_variance_orthogonal_design():
    n, h, sigma = 30, 5.0, 1.7
    data = RegressionData(X=orthogonal_design(n, 4), y=np.zeros(n))
    result = fit(data, GracePenaltySpec(h_2=h), sigma_eps=sigma)
    assert statistic_covariance_diag(result, data) == pytest.approx(
        np.full(4, sigma**2 * n / (n + h) ** 2)
    )


def test_statistic_variance_decreases_in_h():
    rng = np.random.default_rng(5)
    data = RegressionData(X=rng.standard_normal((30, 5)), y=rng.standard_normal(30))
    path = WeightedGraph(num_nodes=5, edges=tuple((j, j + 1, 1.0) for j in range(4)))
    penalty = laplacian(path, jitter=0.5)
    variances = [
        statistic_covariance_diag(result, data)
        for result in fit_path(data, penalty, [1e2, 1e4, 1e6], sigma_eps=1.0)
    ]
    assert np.all(variances[1] < variances[0])
    assert np.all(variances[2] < variances[1])


def test_statistic_variance_needs_noise_level():
    data = RegressionData(X=orthogonal_design(10, 2), y=np.zeros(10))
    with pytest.raises(ValueError):
        statistic_covariance_diag(fit(data, GracePenaltySpec(h_2=1.0)), data)


def test_bias_bound_two_covariates():
    n, h = 20, 3.0
    data = RegressionData(X=orthogonal_design(n, 2), y=np.zeros(n))
    penalty = laplacian(WeightedGraph(num_nodes=2, edges=((0, 1, 1.0),)))
    result = fit(data, GracePenaltySpec(penalty=penalty, h_g=h))
    smallest = np.linalg.eigvalsh(system_matrix(data, result.spec))[0]
    assert smallest == pytest.approx(n)
    assert bias_bound(result, np.array([1.0, 0.0])) == pytest.approx(h * math.sqrt(2) / smallest, rel=1e-8)


def test_bias_bound_vanishes_for_smooth_or_unpenalized():
    data = RegressionData(X=orthogonal_design(20, 2), y=np.zeros(20))
    penalty = laplacian(WeightedGraph(num_nodes=2, edges=((0, 1, 1.0),)))
    smooth = fit(data, GracePenaltySpec(penalty=penalty, h_g=4.0))
    assert bias_bound(smooth, np.array([1.0, 1.0])) == 0.0
    plain = fit(data, GracePenaltySpec(penalty=penalty, h_g=0.0))
    assert bias_bound(plain, np.array([1.0, 0.0])) == 0.0


def test_penalty_spec_requires_matrix_for_graph_term():
    with pytest.raises(ValueError):
        GracePenaltySpec(h_g=1.0)


def test_method_penalties_and_grids():
    g = WeightedGraph(num_nodes=3, edges=((0, 1, 1.0), (1, 2, 1.0)))
    base = laplacian(g)
    assert method_penalty(Method.GRACE, base).jitter == pytest.approx(0.01)
    assert method_penalty(Method.GRACE, base, jitter=0.2).jitter == pytest.approx(0.2)
    assert method_penalty(Method.GRACER, base) is base
    assert method_penalty(Method.GRACEI, base) is None
    assert method_penalty(Method.RIDGE, base) is None
    assert base.kind == PenaltyKind.LAPLACIAN

    plan = CvPlan(grid_g=(1.0, 10.0), grid_2=(0.5, 5.0))
    assert method_plan(Method.GRACE, plan).grid_2 == (0.0,)
    assert method_plan(Method.GRACEI, plan).grid_g == (0.0,)
    assert method_plan(Method.GRACER, plan) == plan
    assert method_plan(Method.RIDGE, plan) is None
    assert ridge_spec().h_2 == 1.0


def random_graph(p: int, rng: np.random.Generator, density: float = 0.3) -> WeightedGraph:
    edges = tuple(
        (u, v, float(rng.uniform(0.5, 2.0)))
        for u in range(p)
        for v in range(u + 1, p)
        if rng.random() < density
    )
    return WeightedGraph(num_nodes=p, edges=edges)


def noise_fits(X, beta_star, spec, sigma, draws, seed):
    rng = np.random.default_rng(seed)
    mean_response = X @ beta_star
    return np.array(
        [
            fit(RegressionData(X=X, y=mean_response + sigma * rng.standard_normal(X.shape[0])), spec).beta_hat
            for _ in range(draws)
        ]
    )


def test_two_penalty_form_is_one_custom_penalty():
    rng = np.random.default_rng(12)
    p = 6
    data = RegressionData(X=rng.standard_normal((25, p)), y=rng.standard_normal(25))
    base = laplacian(random_graph(p, rng))
    h_g, h_2 = 7.5, 0.8
    two_term = fit(data, GracePenaltySpec(penalty=base, h_g=h_g, h_2=h_2))
    combined = custom_penalty(h_g * base.entries + h_2 * np.eye(p))
    single = fit(data, GracePenaltySpec(penalty=combined, h_g=1.0, h_2=0.0))
    assert single.beta_hat == pytest.approx(two_term.beta_hat, rel=1e-10, abs=1e-12)


@pytest.mark.slow
def test_fit_is_unbiased_when_truth_is_smooth_on_the_graph():
    rng = np.random.default_rng(21)
    n, p, draws, sigma = 40, 4, 200, 1.0
    X = rng.standard_normal((n, p))
    g = WeightedGraph(num_nodes=p, edges=((0, 1, 1.0), (2, 3, 2.0)))
    beta_star = np.array([1.5, 1.5, -0.7, -0.7])
    spec = GracePenaltySpec(penalty=laplacian(g), h_g=30.0)
    assert bias_bound(fit(RegressionData(X=X, y=X @ beta_star), spec), beta_star) == 0.0

    estimates = noise_fits(X, beta_star, spec, sigma, draws, seed=22)
    standard_errors = estimates.std(axis=0, ddof=1) / math.sqrt(draws)
    assert np.all(np.abs(estimates.mean(axis=0) - beta_star) <= 3 * standard_errors)


@pytest.mark.slow
def test_empirical_bias_respects_bound_on_random_instances():
    draws = 200
    for instance in range(20):
        rng = np.random.default_rng(100 + instance)
        p = int(rng.integers(3, 11))
        n = 30
        X = rng.standard_normal((n, p))
        beta_star = rng.normal(0.0, 1.0, size=p)
        spec = GracePenaltySpec(penalty=laplacian(random_graph(p, rng)), h_g=float(rng.uniform(1.0, 50.0)))
        bound = bias_bound(fit(RegressionData(X=X, y=X @ beta_star), spec), beta_star)

        estimates = noise_fits(X, beta_star, spec, 1.0, draws, seed=200 + instance)
        mc_error = math.sqrt(float((estimates.var(axis=0, ddof=1) / draws).sum()))
        assert np.linalg.norm(estimates.mean(axis=0) - beta_star) <= bound + 3 * mc_error


@pytest.mark.slow
def test_sampled_statistic_variance_matches_formula():
    rng = np.random.default_rng(31)
    n, p, draws, sigma = 50, 5, 500, 1.3
    X = rng.standard_normal((n, p))
    beta_star = np.array([1.0, 0.5, 0.0, 0.0, -0.8])
    beta_tilde = np.array([0.9, 0.4, 0.1, 0.0, -0.6])
    penalty = laplacian(random_graph(p, rng, density=0.5), jitter=0.01)
    spec = GracePenaltySpec(penalty=penalty, h_g=20.0)

    statistics = []
    for _ in range(draws):
        data = RegressionData(X=X, y=X @ beta_star + sigma * rng.standard_normal(n))
        statistics.append(grace_statistic(fit(data, spec, sigma_eps=sigma), beta_tilde))
    sampled = np.var(np.array(statistics), axis=0, ddof=1)

    reference = fit(RegressionData(X=X, y=X @ beta_star), spec, sigma_eps=sigma)
    expected = statistic_covariance_diag(reference, RegressionData(X=X, y=X @ beta_star))
    assert sampled == pytest.approx(expected, rel=0.25)
