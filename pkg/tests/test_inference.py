import math
from io import StringIO

import numpy as np
import pandas as pd
import pytest

from src.errors import DimensionError
from src.grace.estimator import fit, statistic_covariance_diag
from src.graph.laplacian import custom_penalty
from src.inference.multiple_testing import adjust, adjust_by, adjust_holm
from src.inference.power_analysis import detection_size, detection_threshold, two_covariate_components
from src.inference.report import REPORT_COLUMNS, build_report, format_report_csv
from src.inference.statistics import bias_matrix, gamma_bound, grace_statistic, p_values, rate_factor
from src.models import (
    BoundVariant,
    CovariateResult,
    Correction,
    GracePenaltySpec,
    Method,
    RegressionData,
    TestConfig,
    TestReport,
)


def orthogonal_design(n: int, p: int, seed: int = 0) -> np.ndarray:
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))
    return math.sqrt(n) * q


def pair_data(n: int, rho: float, seed: int = 0) -> RegressionData:
    base = orthogonal_design(n, 2, seed)
    X = np.column_stack([base[:, 0], rho * base[:, 0] + math.sqrt(1 - rho**2) * base[:, 1]])
    y = X @ np.array([0.8, 0.1]) + np.random.default_rng(seed + 1).standard_normal(n)
    return RegressionData(X=X, y=y)


def pair_fit(data: RegressionData, l: float, h: float, sigma: float = 1.0):
    penalty = custom_penalty(np.array([[1.0, l], [l, 1.0]]))
    return fit(data, GracePenaltySpec(penalty=penalty, h_g=h), sigma_eps=sigma)


def test_statistic_without_initial_estimate_is_fit():
    data = pair_data(60, 0.3)
    result = pair_fit(data, 0.5, 20.0)
    assert np.array_equal(grace_statistic(result, np.zeros(2)), result.beta_hat)


def test_statistic_unpenalized_is_least_squares():
    data = pair_data(60, 0.3)
    result = fit(data, GracePenaltySpec(), sigma_eps=1.0)
    z = grace_statistic(result, np.array([5.0, -3.0]))
    assert z == pytest.approx(np.linalg.lstsq(data.X, data.y, rcond=None)[0])


def test_statistic_rejects_wrong_shape():
    result = pair_fit(pair_data(30, 0.2), 0.5, 3.0)
    with pytest.raises(DimensionError):
        grace_statistic(result, np.zeros(3))


def test_gamma_zero_for_orthogonal_ridge_type_fit():
    n = 40
    data = RegressionData(X=orthogonal_design(n, 4), y=np.zeros(n))
    result = fit(data, GracePenaltySpec(h_2=10.0), sigma_eps=1.0)
    assert gamma_bound(result, TestConfig(), n, 4) == pytest.approx(np.zeros(4), abs=1e-12)
    fullrow = gamma_bound(result, TestConfig(bound_variant=BoundVariant.FULLROW), n, 4)
    assert fullrow == pytest.approx(np.full(4, 10.0 / (n + 10.0) * rate_factor(n, 4, 0.05)))


def test_gamma_matches_two_covariate_closed_form():
    n, rho, l, h, xi = 100, 0.5, 0.9, 100.0, 0.05
    data = pair_data(n, rho)
    result = pair_fit(data, l, h)
    t = rate_factor(n, 2, xi)
    det = (n + h) ** 2 - (n * rho + h * l) ** 2
    expected = abs(n * h * (l - rho)) / det * t
    gamma = gamma_bound(result, TestConfig(xi=xi), n, 2)
    assert gamma[0] == pytest.approx(expected, rel=1e-8)
    assert gamma[0] == pytest.approx(0.02093, rel=2e-3)


def test_gamma_vanishes_when_penalty_matches_correlation():
    n, rho = 50, 0.4
    result = pair_fit(pair_data(n, rho), rho, 30.0)
    assert gamma_bound(result, TestConfig(), n, 2)[0] == pytest.approx(0.0, abs=1e-12)


def test_scale_invariant_gamma_multiplies_by_sigma():
    n = 80
    data = pair_data(n, 0.2)
    result = pair_fit(data, 0.7, 40.0, sigma=2.5)
    plain = gamma_bound(result, TestConfig(), n, 2)
    scaled = gamma_bound(result, TestConfig(scale_invariant=True), n, 2)
    assert scaled == pytest.approx(2.5 * plain)


def test_two_covariate_components_agree_with_general_code():
    n, rho, l, h, sigma, xi = 120, 0.3, -0.4, 60.0, 1.3, 0.05
    data = pair_data(n, rho, seed=7)
    result = pair_fit(data, l, h, sigma=sigma)
    beta_tilde = np.array([0.6, -0.2])
    parts = two_covariate_components(
        n, h, rho, l, data.X[:, 0] @ data.y, data.X[:, 1] @ data.y, beta_tilde, sigma, rate_factor(n, 2, xi)
    )
    assert parts["z1"] == pytest.approx(grace_statistic(result, beta_tilde)[0], rel=1e-9)
    assert parts["gamma1"] == pytest.approx(gamma_bound(result, TestConfig(xi=xi), n, 2)[0], rel=1e-9)
    assert parts["var1"] == pytest.approx(statistic_covariance_diag(result, data)[0], rel=1e-9)


def test_bias_matrix_shape():
    result = pair_fit(pair_data(30, 0.1), 0.2, 5.0)
    assert bias_matrix(result).shape == (2, 2)


def test_rate_factor():
    assert rate_factor(100, 500, 0.05) == pytest.approx((math.log(500) / 100) ** 0.45)
    assert rate_factor(2, 1000, 0.05) > 1.0


def test_p_value_is_one_inside_bound():
    assert p_values(np.array([0.3, -0.3]), np.array([0.3, 0.5]), np.array([1.0, 1.0])).tolist() == [1.0, 1.0]


def test_p_value_at_normal_quantile():
    p = p_values(np.array([1.959964 * 0.7]), np.array([0.0]), np.array([0.7]))
    assert p[0] == pytest.approx(0.05, abs=1e-4)


def test_p_value_with_bound_offset():
    p = p_values(np.array([0.5]), np.array([0.1]), np.array([0.2]))
    assert p[0] == pytest.approx(0.04550, abs=1e-5)


def test_p_value_rejects_nonpositive_sd():
    with pytest.raises(ValueError):
        p_values(np.array([1.0]), np.array([0.0]), np.array([0.0]))


def test_by_adjustment():
    assert adjust_by([0.01, 0.02, 0.03]) == pytest.approx([0.055, 0.055, 0.055])
    assert adjust_by([0.2]) == pytest.approx([0.2])
    assert adjust_by([1.0, 1.0, 1.0]).tolist() == [1.0, 1.0, 1.0]


def test_holm_adjustment():
    assert adjust_holm([0.01, 0.04]) == pytest.approx([0.02, 0.04])
    assert adjust_holm([0.03, 0.03, 0.03]) == pytest.approx([0.09, 0.09, 0.09])
    assert adjust_holm([0.2]) == pytest.approx([0.2])


def test_adjustment_keeps_order_and_dominates_raw():
    raw = np.array([0.04, 0.001, 0.3, 0.02])
    for correction in Correction:
        adjusted = adjust(raw, correction)
        assert np.all(adjusted >= raw)
        assert np.all(adjusted <= 1.0)
    assert adjust(raw, Correction.NONE).tolist() == raw.tolist()
    with pytest.raises(ValueError):
        adjust([0.5, 1.2], Correction.BY)


def test_detection_size():
    assert detection_size(0.0, 1.0, 0.05, 0.05) == pytest.approx(3.9199, abs=1e-4)
    assert detection_size(0.5, 0.1, 0.05, 0.5) == pytest.approx(1.8705, abs=1e-4)
    with pytest.raises(ValueError):
        detection_size(0.0, 1.0, 0.05, 1.0)


def test_detection_threshold_uses_fit():
    n = 40
    data = RegressionData(X=orthogonal_design(n, 3), y=np.zeros(n))
    result = fit(data, GracePenaltySpec(h_2=2.0), sigma_eps=1.0)
    sd = math.sqrt(n) / (n + 2.0)
    expected = detection_size(0.0, sd, 0.05, 0.2)
    assert detection_threshold(result, data, TestConfig(), 0.2) == pytest.approx(np.full(3, expected), abs=1e-9)


def test_report_rows_satisfy_invariants():
    z = np.array([3.0, 0.1, -2.5, 0.0])
    gamma = np.array([0.2, 0.2, 0.1, 0.0])
    sd = np.array([0.5, 0.5, 1.0, 1.0])
    report = build_report(Method.GRACE, z, gamma, sd, TestConfig(), sigma_used=1.0)
    assert [row.covariate for row in report.rows] == ["1", "2", "3", "4"]
    assert report.rows[1].p_raw == 1.0
    assert all(row.p_adj >= row.p_raw for row in report.rows)
    assert report.rejections == 1
    assert report.column("p_raw").shape == (4,)


def test_report_rejects_inconsistent_rows():
    row = CovariateResult(covariate="a", z_hat=0.1, gamma=0.5, sd=1.0, p_raw=0.3, p_adj=0.3, rejected=False)
    with pytest.raises(ValueError):
        TestReport(rows=[row], method=Method.GRACE, correction=Correction.BY, alpha=0.05, sigma_used=1.0)


def test_report_csv_layout():
    report = build_report(
        Method.RIDGE,
        np.array([4.0, 0.0]),
        np.zeros(2),
        np.ones(2),
        TestConfig(correction=Correction.HOLM),
        sigma_used=1.0,
        covariates=["TP53", "BRCA1"],
    )
    text = format_report_csv(report)
    frame = pd.read_csv(StringIO(text), dtype={"rejected": str})
    assert list(frame.columns) == REPORT_COLUMNS
    assert frame["covariate"].tolist() == ["TP53", "BRCA1"]
    assert frame["rejected"].tolist() == ["true", "false"]
    assert frame["p_raw"].iloc[1] == 1.0
    assert "e+00" in text


def random_p_values(rng: np.random.Generator) -> np.ndarray:
    m = int(rng.integers(1, 30))
    small = rng.random(m) < 0.4
    return np.where(small, rng.uniform(0.0, 0.01, m), rng.uniform(0.0, 1.0, m))


@pytest.mark.parametrize("adjuster", [adjust_by, adjust_holm])
def test_adjustment_is_permutation_equivariant_and_monotone(adjuster):
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        raw = random_p_values(rng)
        adjusted = adjuster(raw)
        order = rng.permutation(raw.size)
        assert adjuster(raw[order]) == pytest.approx(adjusted[order], abs=1e-12)

        bumped = raw.copy()
        j = int(rng.integers(raw.size))
        bumped[j] = rng.uniform(raw[j], 1.0)
        assert np.all(adjuster(bumped) >= adjusted - 1e-12)


def test_p_values_are_monotone_in_statistic_and_bound():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        m = int(rng.integers(1, 10))
        z = rng.normal(0.0, 2.0, m)
        gamma = rng.uniform(0.0, 1.0, m)
        sd = rng.uniform(0.1, 2.0, m)
        base = p_values(z, gamma, sd)

        larger_z = z + np.sign(z) * rng.uniform(0.0, 1.0, m)
        assert np.all(p_values(larger_z, gamma, sd) <= base + 1e-15)

        larger_gamma = gamma + rng.uniform(0.0, 1.0, m)
        assert np.all(p_values(z, larger_gamma, sd) >= base - 1e-15)


def test_fullrow_bound_dominates_offdiag_on_correlated_designs():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n, p = int(rng.integers(20, 60)), int(rng.integers(2, 8))
        X = rng.standard_normal((n, p)) + rng.normal(0.0, 0.8) * rng.standard_normal((n, 1))
        data = RegressionData(X=X, y=rng.standard_normal(n))
        kernel = rng.normal(size=(p, p))
        penalty = custom_penalty(kernel @ kernel.T / p)
        result = fit(data, GracePenaltySpec(penalty=penalty, h_g=float(rng.uniform(1.0, 100.0))), sigma_eps=1.0)
        offdiag = gamma_bound(result, TestConfig(bound_variant=BoundVariant.OFFDIAG), n, p)
        fullrow = gamma_bound(result, TestConfig(bound_variant=BoundVariant.FULLROW), n, p)
        assert np.all(fullrow >= offdiag)
        assert np.any(offdiag > 0)


@pytest.mark.parametrize("seed", range(100))
def test_two_covariate_closed_forms_on_random_instances(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 200))
    rho = float(rng.uniform(-0.9, 0.9))
    l = float(rng.uniform(-0.95, 0.95))
    h = float(rng.uniform(1.0, 200.0))
    sigma = float(rng.uniform(0.5, 3.0))
    xi = 0.05
    data = pair_data(n, rho, seed=seed)
    result = pair_fit(data, l, h, sigma=sigma)
    beta_tilde = rng.normal(0.0, 1.0, 2)
    parts = two_covariate_components(
        n, h, rho, l, data.X[:, 0] @ data.y, data.X[:, 1] @ data.y, beta_tilde, sigma, rate_factor(n, 2, xi)
    )
    assert parts["z1"] == pytest.approx(grace_statistic(result, beta_tilde)[0], rel=1e-8, abs=1e-12)
    assert parts["gamma1"] == pytest.approx(gamma_bound(result, TestConfig(xi=xi), n, 2)[0], rel=1e-8)
    assert parts["var1"] == pytest.approx(statistic_covariance_diag(result, data)[0], rel=1e-8)
