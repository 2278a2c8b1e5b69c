from __future__ import annotations

from io import StringIO
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.inference.multiple_testing import adjust
from src.inference.statistics import p_values
from src.models import CovariateResult, Method, TestConfig, TestReport

REPORT_COLUMNS = ["covariate", "z", "gamma", "sd", "p_raw", "p_adj", "rejected"]
FLOAT_FORMAT = "%.16e"


def build_report(
    method: Method,
    z: np.ndarray,
    gamma: np.ndarray,
    sd: np.ndarray,
    config: TestConfig,
    sigma_used: float,
    covariates: Optional[Sequence[str]] = None,
    h_g: float = 0.0,
    h_2: float = 0.0,
    warnings: Optional[List[str]] = None,
) -> TestReport:
    p_raw = p_values(z, gamma, sd)
    p_adj = adjust(p_raw, config.correction)
    labels = list(covariates) if covariates is not None else [str(j + 1) for j in range(len(z))]
    rows = [
        CovariateResult(
            covariate=labels[j],
            z_hat=float(z[j]),
            gamma=float(gamma[j]),
            sd=float(sd[j]),
            p_raw=float(p_raw[j]),
            p_adj=float(p_adj[j]),
            rejected=bool(p_adj[j] <= config.alpha),
        )
        for j in range(len(z))
    ]
    return TestReport(
        rows=rows,
        method=method,
        correction=config.correction,
        alpha=config.alpha,
        sigma_used=sigma_used,
        h_g=h_g,
        h_2=h_2,
        warnings=list(warnings or []),
    )


def report_frame(report: TestReport) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "covariate": row.covariate,
                "z": row.z_hat,
                "gamma": row.gamma,
                "sd": row.sd,
                "p_raw": row.p_raw,
                "p_adj": row.p_adj,
                "rejected": "true" if row.rejected else "false",
            }
            for row in report.rows
        ],
        columns=REPORT_COLUMNS,
    )


def format_report_csv(report: TestReport) -> str:
    buffer = StringIO()
    report_frame(report).to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def format_frame_csv(frame: pd.DataFrame) -> str:
    buffer = StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()
