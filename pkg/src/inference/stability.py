"""Sensitivity of Grace test discoveries to the tuning parameter and to the network."""
from __future__ import annotations

from typing import List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from src.graph.laplacian import build_penalty
from src.graph.perturbation import toggle_pairs
from src.grace.methods import method_penalty
from src.models import (
    InitialEstimates,
    Method,
    PenaltyKind,
    PenaltyMatrix,
    RegressionData,
    TestConfig,
    WeightedGraph,
)
from src.pipeline import evaluate_at
from src.simulation.seeds import derive_seed
from src.utils.logging import get_logger

logger = get_logger("inference.stability")


def _rejected(report) -> Set[int]:
    return {idx for idx, row in enumerate(report.rows) if row.rejected}


def tuning_sweep(
    data: RegressionData,
    penalty: PenaltyMatrix,
    initial: InitialEstimates,
    h_grid: Sequence[float],
    config: TestConfig,
    jitter: Optional[float] = None,
) -> List[Tuple[float, int]]:
    """Number of Grace rejections at each tuning parameter in ``h_grid``."""
    grace_penalty = method_penalty(Method.GRACE, penalty, jitter)
    sweep: List[Tuple[float, int]] = []
    for h in h_grid:
        report = evaluate_at(data, Method.GRACE, grace_penalty, float(h), 0.0, initial, config)
        sweep.append((float(h), report.rejections))
    return sweep


def network_stability(
    data: RegressionData,
    graph: WeightedGraph,
    m_list: Sequence[int],
    reps: int,
    initial: InitialEstimates,
    config: TestConfig,
    h_g: float,
    seed: int,
    kind: PenaltyKind = PenaltyKind.LAPLACIAN,
    jitter: Optional[float] = None,
) -> pd.DataFrame:
    """Mean count of covariates significant under both the original and a toggled graph."""
    base_penalty = method_penalty(Method.GRACE, build_penalty(kind, graph, data.p), jitter)
    baseline = _rejected(
        evaluate_at(data, Method.GRACE, base_penalty, h_g, 0.0, initial, config)
    )
    rows = []
    for m in m_list:
        overlaps = []
        for rep in range(reps):
            toggled = toggle_pairs(graph, m, derive_seed(seed, rep, f"toggle-{m}"))
            penalty = method_penalty(Method.GRACE, build_penalty(kind, toggled, data.p), jitter)
            report = evaluate_at(data, Method.GRACE, penalty, h_g, 0.0, initial, config)
            overlaps.append(len(baseline & _rejected(report)))
        logger.info("Toggled %d pairs: mean overlap %.2f of %d", m, np.mean(overlaps), len(baseline))
        rows.append(
            {
                "m": m,
                "baseline": len(baseline),
                "mean_overlap": float(np.mean(overlaps)),
                "se_overlap": float(np.std(overlaps, ddof=1) / np.sqrt(reps)) if reps > 1 else float("nan"),
            }
        )
    return pd.DataFrame(rows, columns=["m", "baseline", "mean_overlap", "se_overlap"])
