from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import GraceError, StudyAbortedError
from src.graph.laplacian import laplacian
from src.graph.perturbation import perturb_edges
from src.models import (
    Correction,
    CvPlan,
    Method,
    SimDesign,
    SimRecord,
    SimReport,
    TestConfig,
    WeightedGraph,
)
from src.pipeline import initial_estimates, run_grace_test
from src.selection.cross_validation import DEFAULT_GRID
from src.simulation.design import generate_data, hub_satellite_graph, nearest_tabulated_r2
from src.simulation.seeds import derive_seed
from src.solvers.standardize import standardize
from src.utils.logging import get_logger
from src.utils.parallel import run_ordered

logger = get_logger("simulation.study")

MAX_FAILURE_SHARE = 0.10
BAND_QUANTILE = 1.96
REPORT_COLUMNS = ["method", "npe", "r2", "power_mean", "power_se", "level_mean", "level_se", "replicates"]


@dataclass
class RunningMoments:
    """Welford accumulator; ``merge`` combines partial results."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.count == 0:
            return RunningMoments(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningMoments(other.count, other.mean, other.m2)
        total = self.count + other.count
        delta = other.mean - self.mean
        return RunningMoments(
            total,
            self.mean + delta * other.count / total,
            self.m2 + other.m2 + delta**2 * self.count * other.count / total,
        )

    def standard_error(self) -> Optional[float]:
        if self.count < 2:
            return None
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


@dataclass(frozen=True)
class ReplicateTask:
    design: SimDesign
    true_graph: WeightedGraph
    methods: Tuple[Method, ...]
    config: TestConfig
    grid_g: Tuple[float, ...]
    grid_2: Tuple[float, ...]
    folds: int
    npe: int
    replicate: int


def _rates(rejected: np.ndarray, signal_count: int) -> Tuple[Optional[float], Optional[float]]:
    power = float(rejected[:signal_count].mean()) if signal_count > 0 else None
    rest = rejected[signal_count:]
    level = float(rest.mean()) if rest.size else None
    return power, level


def run_replicate(task: ReplicateTask) -> List[Dict]:
    """Regenerate graph, design and noise for one replicate and test with every method."""
    design = task.design
    master = design.seed
    graph = perturb_edges(task.true_graph, task.npe, derive_seed(master, task.replicate, f"graph{task.npe}"))
    penalty = laplacian(graph)
    l_star = laplacian(task.true_graph)
    outcomes: List[Dict] = []

    def failure(method: Method, reason: str) -> Dict:
        return {"method": method, "npe": task.npe, "replicate": task.replicate, "failed": True, "reason": reason}

    try:
        X_raw, y_raw, _ = generate_data(design, l_star, derive_seed(master, task.replicate, "data"))
        data, _ = standardize(X_raw, y_raw)
        initial = initial_estimates(data)
    except GraceError as exc:
        return [failure(method, str(exc)) for method in task.methods]

    plan = CvPlan(
        folds=task.folds,
        grid_g=task.grid_g,
        grid_2=task.grid_2,
        seed=derive_seed(master, task.replicate, "folds") % 2**32,
    )
    for method in task.methods:
        try:
            run = run_grace_test(data, method, penalty, task.config, plan, initial=initial)
        except GraceError as exc:
            outcomes.append(failure(method, str(exc)))
            continue
        rejected = np.array([row.rejected for row in run.report.rows], dtype=float)
        power, level = _rates(rejected, design.signal_count)
        outcomes.append(
            {
                "method": method,
                "npe": task.npe,
                "replicate": task.replicate,
                "failed": False,
                "power": power,
                "level": level,
                "h_g": run.report.h_g,
                "h_2": run.report.h_2,
                "sigma": initial.sigma,
            }
        )
    return outcomes


def run_study(
    design: SimDesign,
    methods: Sequence[Method],
    config: TestConfig,
    threads: int = 1,
    grid_g: Sequence[float] = DEFAULT_GRID,
    grid_2: Sequence[float] = DEFAULT_GRID,
    folds: int = 10,
    details: bool = False,
) -> SimReport:
    """Monte-Carlo power and type-I error over ``design.npe_list`` and ``design.replicates``.

    Rejections use raw p-values at ``config.alpha``. L* and beta* stay fixed; the
    perturbed graph, X and noise are redrawn per replicate.
    """
    methods = tuple(methods)
    per_covariate = config.model_copy(update={"correction": Correction.NONE})
    true_graph = hub_satellite_graph(design)
    r2 = design.r2_label if design.r2_label is not None else nearest_tabulated_r2(design.sigma_eps)
    r2 = float("nan") if r2 is None else r2

    tasks = [
        ReplicateTask(
            design=design,
            true_graph=true_graph,
            methods=methods,
            config=per_covariate,
            grid_g=tuple(grid_g),
            grid_2=tuple(grid_2),
            folds=folds,
            npe=npe,
            replicate=rep,
        )
        for npe in design.npe_list
        for rep in range(design.replicates)
    ]
    logger.info(
        "Running %d replicates x %d NPE values x %d methods on %d thread(s)",
        design.replicates,
        len(design.npe_list),
        len(methods),
        threads,
    )
    batches = run_ordered(run_replicate, tasks, threads=threads)

    power: Dict[Tuple[Method, int], RunningMoments] = {}
    level: Dict[Tuple[Method, int], RunningMoments] = {}
    failures: Dict[Tuple[Method, int], int] = {}
    warnings: List[str] = []
    rows: List[Dict] = []
    for outcome in (item for batch in batches for item in batch):
        key = (outcome["method"], outcome["npe"])
        power.setdefault(key, RunningMoments())
        level.setdefault(key, RunningMoments())
        failures.setdefault(key, 0)
        if outcome["failed"]:
            failures[key] += 1
            message = (
                f"{outcome['method'].value} NPE={outcome['npe']} replicate {outcome['replicate']} "
                f"failed: {outcome['reason']}"
            )
            logger.warning(message)
            warnings.append(message)
        else:
            if outcome["power"] is not None:
                power[key].add(outcome["power"])
            if outcome["level"] is not None:
                level[key].add(outcome["level"])
        if details:
            detail = {k: v for k, v in outcome.items() if k != "method"}
            rows.append({"method": outcome["method"].value, "r2": r2, **detail})

    for key, failed in failures.items():
        if failed > MAX_FAILURE_SHARE * design.replicates:
            raise StudyAbortedError(
                f"{key[0].value} NPE={key[1]}: {failed} of {design.replicates} replicates failed"
            )

    records = []
    for method in methods:
        for npe in design.npe_list:
            key = (method, npe)
            completed = design.replicates - failures[key]
            records.append(
                SimRecord(
                    method=method,
                    npe=npe,
                    r2=r2,
                    power_mean=power[key].mean if power[key].count else None,
                    power_se=power[key].standard_error(),
                    level_mean=level[key].mean if level[key].count else None,
                    level_se=level[key].standard_error(),
                    replicates=completed,
                    failures=failures[key],
                )
            )
    return SimReport(records=records, warnings=warnings, details=rows)


def report_frame(reports: Sequence[SimReport]) -> pd.DataFrame:
    rows = [
        {
            "method": record.method.value,
            "npe": record.npe,
            "r2": record.r2,
            "power_mean": record.power_mean,
            "power_se": record.power_se,
            "level_mean": record.level_mean,
            "level_se": record.level_se,
            "replicates": record.replicates,
        }
        for report in reports
        for record in report.records
    ]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def curves_frame(reports: Sequence[SimReport]) -> pd.DataFrame:
    """Long format with 95% bands (mean +/- 1.96 SE) for external plotting."""
    rows = []
    for report in reports:
        for record in report.records:
            for metric, mean, se in (
                ("power", record.power_mean, record.power_se),
                ("level", record.level_mean, record.level_se),
            ):
                if mean is None:
                    continue
                half = BAND_QUANTILE * se if se is not None else float("nan")
                rows.append(
                    {
                        "method": record.method.value,
                        "npe": record.npe,
                        "r2": record.r2,
                        "metric": metric,
                        "mean": mean,
                        "lower": max(mean - half, 0.0) if se is not None else float("nan"),
                        "upper": min(mean + half, 1.0) if se is not None else float("nan"),
                    }
                )
    return pd.DataFrame(rows, columns=["method", "npe", "r2", "metric", "mean", "lower", "upper"])


def details_frame(reports: Sequence[SimReport]) -> pd.DataFrame:
    return pd.DataFrame([row for report in reports for row in report.details])
