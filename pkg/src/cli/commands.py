from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.errors import DimensionError
from src.graph.laplacian import build_penalty, laplacian, spectral_distance
from src.graph.summary import graph_summary
from src.inference.power_analysis import figure1_grid
from src.inference.report import format_frame_csv, format_report_csv
from src.models import CvPlan, Method, PenaltyKind, PenaltyMatrix, RunConfig, WeightedGraph
from src.parsing.edge_list_parser import parse_edge_list
from src.parsing.matrix_parser import parse_matrix_csv, parse_vector_csv
from src.pipeline import run_grace_test
from src.selection.cross_validation import cv_table_frame
from src.simulation.design import design_for_r2
from src.simulation.study import curves_frame, details_frame, report_frame, run_study
from src.solvers.standardize import standardize
from src.utils.logging import get_logger

logger = get_logger("cli")

REPORT_FILE = "report.csv"
CV_TABLE_FILE = "cv_table.csv"
META_FILE = "run_meta.json"
SIM_REPORT_FILE = "sim_report.csv"
CURVES_FILE = "curves.csv"
DETAILS_FILE = "sim_details.csv"
FIGURE_A_FILE = "figure1a.csv"
FIGURE_B_FILE = "figure1b.csv"
GRAPH_INFO_FILE = "graph_info.json"


def _out_dir(config: RunConfig) -> Path:
    path = Path(config.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _write_meta(out: Path, config: RunConfig, extra: Dict[str, Any]) -> Path:
    meta = {"config": config.model_dump(mode="json"), **extra}
    return _write(out / META_FILE, json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _load_penalty(config: RunConfig, p: int) -> Optional[PenaltyMatrix]:
    if config.method in (Method.GRACEI, Method.RIDGE):
        return None
    if config.penalty == PenaltyKind.IDENTITY:
        return build_penalty(PenaltyKind.IDENTITY, None, p)
    graph = parse_edge_list(Path(config.edges_path), num_nodes=p)
    return build_penalty(config.penalty, graph, p)


def cmd_test(config: RunConfig) -> List[Path]:
    """Standardize, estimate noise, tune, test; write the report, CV table and metadata."""
    X_raw, columns = parse_matrix_csv(Path(config.x_path))
    y_raw = parse_vector_csv(Path(config.y_path))
    if X_raw.shape[0] != y_raw.shape[0]:
        raise DimensionError(f"X has {X_raw.shape[0]} rows but y has {y_raw.shape[0]} values")
    data, _ = standardize(X_raw, y_raw)
    penalty = _load_penalty(config, data.p)
    plan = CvPlan(
        folds=config.folds,
        grid_g=config.grid_g.values(),
        grid_2=config.grid_2.values(),
        seed=config.seed % 2**32,
    )
    run = run_grace_test(
        data,
        config.method,
        penalty,
        config.test_config(),
        plan,
        covariates=columns,
        jitter=config.jitter,
        threads=config.threads,
    )
    out = _out_dir(config)
    written = [_write(out / REPORT_FILE, format_report_csv(run.report))]
    if run.cv is not None:
        written.append(_write(out / CV_TABLE_FILE, format_frame_csv(cv_table_frame(run.cv))))
    written.append(
        _write_meta(
            out,
            config,
            {
                "n": data.n,
                "p": data.p,
                "sigma_hat": run.initial.sigma,
                "lambda0": run.initial.lambda0,
                "lasso_lambda": run.initial.lasso_lambda,
                "h_g": run.report.h_g,
                "h_2": run.report.h_2,
                "rejections": run.report.rejections,
                "warnings": run.report.warnings,
            },
        )
    )
    logger.info("Rejected %d of %d covariates", run.report.rejections, data.p)
    return written


def cmd_simulate(config: RunConfig) -> List[Path]:
    reports = []
    for r2 in config.r2_list:
        design = design_for_r2(
            r2,
            hubs=config.hubs,
            npe_list=config.npe_list,
            replicates=config.replicates,
            seed=config.seed,
        )
        reports.append(
            run_study(
                design,
                config.methods,
                config.test_config(),
                threads=config.threads,
                grid_g=config.grid_g.values(),
                grid_2=config.grid_2.values(),
                folds=config.folds,
                details=config.details,
            )
        )
    out = _out_dir(config)
    written = [
        _write(out / SIM_REPORT_FILE, format_frame_csv(report_frame(reports))),
        _write(out / CURVES_FILE, format_frame_csv(curves_frame(reports))),
    ]
    if config.details:
        written.append(_write(out / DETAILS_FILE, format_frame_csv(details_frame(reports))))
    warnings = [w for report in reports for w in report.warnings]
    written.append(_write_meta(out, config, {"warnings": warnings}))
    return written


def cmd_figure1(config: RunConfig) -> List[Path]:
    panel_a, panel_b = figure1_grid(k=config.k, beta1_abs=config.beta1, t=config.t)
    out = _out_dir(config)
    return [
        _write(out / FIGURE_A_FILE, format_frame_csv(panel_a)),
        _write(out / FIGURE_B_FILE, format_frame_csv(panel_b)),
    ]


def graph_info(graph: WeightedGraph, other: Optional[WeightedGraph] = None) -> Dict[str, Any]:
    info: Dict[str, Any] = graph_summary(graph).model_dump()
    if other is not None:
        info["spectral_distance"] = spectral_distance(laplacian(other), laplacian(graph))
    return info


def cmd_graph_info(config: RunConfig) -> List[Path]:
    graph = parse_edge_list(Path(config.edges_path))
    other = None
    if config.compare_edges_path:
        other = parse_edge_list(Path(config.compare_edges_path), num_nodes=graph.num_nodes)
    info = graph_info(graph, other)
    for key, value in info.items():
        print(f"{key}: {value}")
    return [_write(_out_dir(config) / GRAPH_INFO_FILE, json.dumps(info, indent=2) + "\n")]


COMMANDS = {
    "test": cmd_test,
    "simulate": cmd_simulate,
    "figure1": cmd_figure1,
    "graph-info": cmd_graph_info,
}
