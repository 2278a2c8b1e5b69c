from __future__ import annotations

import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky, cho_factor, cho_solve, solve_triangular

from src.errors import SingularSystemError
from src.graph.laplacian import laplacian
from src.models import PenaltyMatrix, SimDesign, WeightedGraph
from src.utils.logging import get_logger

logger = get_logger("simulation.design")

COVARIANCE_SHIFT = 0.11
SIGMA_FOR_R2: Dict[float, float] = {0.1: 9.5, 0.2: 6.3, 0.3: 4.8}
DEFAULT_NPE = (-165, 0, 350)
EXTENDED_NPE = (-225, -165, -70, -10, 0, 15, 135, 350, 600, 900, 1250, 1650, 2050, 3150)
HIERARCHICAL_SLOPE = 0.9
HIERARCHICAL_VARIANCE = 0.9
RECONCILE_TOLERANCE = 1e-6


def design_for_r2(r2: float, **overrides) -> SimDesign:
    if r2 not in SIGMA_FOR_R2:
        raise ValueError(f"no noise level tabulated for R^2={r2}; choose from {sorted(SIGMA_FOR_R2)}")
    return SimDesign(sigma_eps=SIGMA_FOR_R2[r2], r2_label=r2, **overrides)


def hub_satellite_graph(design: SimDesign) -> WeightedGraph:
    """Hubs at positions 0, s+1, 2(s+1), ...; each linked to its own s satellites."""
    block = 1 + design.satellites_per_hub
    edges = []
    for cluster in range(design.hubs):
        hub = cluster * block
        edges.extend((hub, hub + offset, 1.0) for offset in range(1, block))
    return WeightedGraph(num_nodes=design.p, edges=tuple(edges))


def precision_matrix(l_star: PenaltyMatrix) -> np.ndarray:
    return l_star.entries + COVARIANCE_SHIFT * np.eye(l_star.dim)


def population_covariance(l_star: PenaltyMatrix) -> np.ndarray:
    """(L* + 0.11 I)^-1."""
    try:
        factor = cho_factor(precision_matrix(l_star), lower=True)
    except LinAlgError:
        raise SingularSystemError("L* + 0.11 I is not positive definite") from None
    return cho_solve(factor, np.eye(l_star.dim))


def generate_data(
    design: SimDesign, l_star: PenaltyMatrix, rep_seed: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows of X ~ N(0, (L* + 0.11 I)^-1), y = X beta* + N(0, sigma^2)."""
    try:
        root = cholesky(precision_matrix(l_star), lower=True)
    except LinAlgError:
        raise SingularSystemError("L* + 0.11 I is not positive definite") from None
    rng = np.random.default_rng(rep_seed)
    normals = rng.standard_normal((l_star.dim, design.n))
    # x = R^-T z has covariance (R R^T)^-1
    X = solve_triangular(root, normals, lower=True, trans="T").T
    beta_star = design.beta_star()
    noise = design.sigma_eps * rng.standard_normal(design.n)
    return X, X @ beta_star + noise, beta_star


def expected_r2(design: SimDesign) -> float:
    beta_star = design.beta_star()
    sigma = population_covariance(laplacian(hub_satellite_graph(design)))
    signal = float(beta_star @ sigma @ beta_star)
    return signal / (signal + design.sigma_eps**2)


def hierarchical_covariance(
    satellites: int, hub_variance: float, slope: float, satellite_variance: float
) -> np.ndarray:
    """Covariance of (hub, satellites) when x_sat = slope * x_hub + N(0, satellite_variance)."""
    size = 1 + satellites
    sigma = np.full((size, size), slope**2 * hub_variance)
    sigma[0, :] = sigma[:, 0] = slope * hub_variance
    sigma[0, 0] = hub_variance
    sigma[np.arange(1, size), np.arange(1, size)] += satellite_variance
    return sigma


def exact_hierarchical_parameters(satellites: int) -> Tuple[float, float, float]:
    """(hub variance, slope, satellite variance) reproducing (L* + 0.11 I)^-1 for one cluster."""
    diagonal = 1.0 + COVARIANCE_SHIFT
    hub_precision = satellites + COVARIANCE_SHIFT - satellites / diagonal
    return 1.0 / hub_precision, 1.0 / diagonal, 1.0 / diagonal


def reconcile_hierarchical_form(
    satellites: int = 9,
    hub_variance: Optional[float] = None,
    slope: float = HIERARCHICAL_SLOPE,
    satellite_variance: float = HIERARCHICAL_VARIANCE,
    tol: float = RECONCILE_TOLERANCE,
) -> float:
    """Largest entrywise gap between the hierarchical form and (L* + 0.11 I)^-1 on one cluster.

    A gap above ``tol`` is logged as a warning and returned, never corrected.
    """
    one_cluster = SimDesign(hubs=1, satellites_per_hub=satellites, signal_count=0)
    target = population_covariance(laplacian(hub_satellite_graph(one_cluster)))
    if hub_variance is None:
        hub_variance = float(target[0, 0])
    candidate = hierarchical_covariance(satellites, hub_variance, slope, satellite_variance)
    gap = float(np.max(np.abs(candidate - target)))
    if gap > tol:
        logger.warning(
            "Hierarchical form (slope %.4g, satellite variance %.4g) differs from "
            "(L* + 0.11 I)^-1 by %.3e (tolerance %.1e)",
            slope,
            satellite_variance,
            gap,
            tol,
        )
    return gap


def sigma_for_r2(r2: float) -> float:
    if r2 in SIGMA_FOR_R2:
        return SIGMA_FOR_R2[r2]
    raise ValueError(f"no noise level tabulated for R^2={r2}")


def nearest_tabulated_r2(sigma_eps: float) -> Optional[float]:
    for r2, sigma in SIGMA_FOR_R2.items():
        if math.isclose(sigma, sigma_eps):
            return r2
    return None
