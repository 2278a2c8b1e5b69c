"""Detection sizes and the two-covariate power comparison between Grace, GraceI and ridge."""
from __future__ import annotations

import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect
from scipy.stats import norm

from src.grace.estimator import statistic_covariance_diag
from src.inference.statistics import gamma_bound
from src.models import FitResult, RegressionData, TestConfig

BOUNDARY_TOLERANCE = 1e-10
RATIO_PLUS = 1.02
RATIO_MINUS = 0.98
LOG_RATIO_BAND = 0.5
DEFAULT_K = 10.0
DEFAULT_T = 0.25
DEFAULT_BETA1 = 1.0


def detection_size(gamma, sd, alpha: float, psi: float) -> np.ndarray:
    """2 Gamma + q(1 - alpha/2) sd + q(1 - psi/2)."""
    if not 0 < psi < 1:
        raise ValueError(f"psi must lie in (0, 1), got {psi}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    gamma = np.asarray(gamma, dtype=float)
    sd = np.asarray(sd, dtype=float)
    return 2.0 * gamma + norm.ppf(1 - alpha / 2) * sd + norm.ppf(1 - psi / 2)


def detection_threshold(
    fit: FitResult, data: RegressionData, config: TestConfig, psi: float
) -> np.ndarray:
    """Per-covariate coefficient size sufficient for asymptotic detection."""
    gamma = gamma_bound(fit, config, data.n, data.p)
    sd = np.sqrt(statistic_covariance_diag(fit, data))
    return detection_size(gamma, sd, config.alpha, psi)


def upsilon(k: float, l: float, rho: float, beta1_abs: float, t: float) -> float:
    """Power functional for two covariates; ``k`` is h/n and ``t`` the rate factor."""
    if abs(l) > 1:
        raise ValueError(f"|l| must not exceed 1, got {l}")
    if abs(rho) > 1:
        raise ValueError(f"|rho| must not exceed 1, got {rho}")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    numerator = ((k + 1) ** 2 - (rho + l * k) ** 2) * beta1_abs - t * abs(k * (l - rho))
    radicand = (1 + 2 * k) * (1 - rho**2) + k**2 * (1 + l**2 - 2 * l * rho)
    if radicand <= 0:
        raise ValueError("degenerate denominator; need |rho| < 1 or k > 0")
    return numerator / math.sqrt(radicand)


def asymptotic_ratio(l: float, rho: float) -> float:
    """Large-k limit of upsilon(k, l, rho) / upsilon(k, 0, rho)."""
    return (1 - l**2) / math.sqrt(1 + l**2 - 2 * l * rho)


def grace_vs_gracei_boundary(rho: float) -> float:
    """Root of l^3 - 3l + 2 rho on [-1, 1]."""
    if abs(rho) > 1:
        raise ValueError(f"|rho| must not exceed 1, got {rho}")

    def cubic(l: float) -> float:
        return l**3 - 3 * l + 2 * rho

    # cubic(-1) = 2 + 2 rho >= 0 and cubic(1) = 2 rho - 2 <= 0
    if cubic(-1.0) == 0:
        return -1.0
    if cubic(1.0) == 0:
        return 1.0
    return bisect(cubic, -1.0, 1.0, xtol=BOUNDARY_TOLERANCE)


def _classify(value: float, upper: float, lower: float) -> str:
    if np.isnan(value):
        return "-"
    if value > upper:
        return "+"
    if value < lower:
        return "-"
    return "o"


def figure1_grid(
    k: float = DEFAULT_K,
    beta1_abs: float = DEFAULT_BETA1,
    t: float = DEFAULT_T,
    l_grid: Optional[Sequence[float]] = None,
    rho_grid: Optional[Sequence[float]] = None,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Plot-ready records for the Grace/GraceI ratio and the Grace/ridge log-ratio.

    Rows with |rho| = 1 are dropped. Non-positive ratios in the log panel are
    reported as NaN and classified '-'.
    """
    if l_grid is None:
        l_grid = np.round(np.linspace(-1.0, 1.0, 21), 10)
    if rho_grid is None:
        rho_grid = np.round(np.linspace(-1.0, 1.0, 21), 10)
    rho_values = [float(r) for r in rho_grid if abs(r) < 1]

    ratio_rows = []
    log_rows = []
    for rho in rho_values:
        baseline = upsilon(k, 0.0, rho, beta1_abs, t)
        ridge = math.sqrt(1 - rho**2) * beta1_abs
        for l in l_grid:
            l = float(l)
            value = upsilon(k, l, rho, beta1_abs, t)
            ratio = value / baseline if baseline > 0 else float("nan")
            ratio_rows.append(
                {"l": l, "rho": rho, "value": ratio, "sign": _classify(ratio, RATIO_PLUS, RATIO_MINUS)}
            )
            relative = value / ridge if ridge > 0 else float("nan")
            log_ratio = math.log(relative) if relative > 0 else float("nan")
            log_rows.append(
                {
                    "l": l,
                    "rho": rho,
                    "value": log_ratio,
                    "sign": _classify(log_ratio, LOG_RATIO_BAND, -LOG_RATIO_BAND),
                }
            )
    columns = ["l", "rho", "value", "sign"]
    return pd.DataFrame(ratio_rows, columns=columns), pd.DataFrame(log_rows, columns=columns)


def two_covariate_components(
    n: float,
    h: float,
    rho: float,
    l: float,
    x1_y: float,
    x2_y: float,
    beta_tilde: Sequence[float],
    sigma: float,
    t: float,
) -> Dict[str, float]:
    """Closed forms for the first covariate with L = [[1, l], [l, 1]] and sample correlation rho."""
    det = (n + h) ** 2 - (n * rho + h * l) ** 2
    b1, b2 = float(beta_tilde[0]), float(beta_tilde[1])
    z1 = (
        (n + h) * x1_y
        - (n * rho + h * l) * x2_y
        + h * b1 * (n + h - n * rho * l - h * l**2)
        + n * h * b2 * (l - rho)
    ) / det
    gamma1 = abs(n * h * (l - rho)) / det * t
    variance1 = (
        sigma**2
        * ((n**3 + 2 * h * n**2) * (1 - rho**2) + n * h**2 * (1 + l**2 - 2 * l * rho))
        / det**2
    )
    return {"z1": z1, "gamma1": gamma1, "var1": variance1, "det": det}
