from __future__ import annotations

import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import DimensionError, GraphError

ARRAY_CONFIG = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _frozen_array(values: Any, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class PenaltyKind(str, Enum):
    LAPLACIAN = "laplacian"
    NORMALIZED_LAPLACIAN = "normalized_laplacian"
    IDENTITY = "identity"
    CUSTOM = "custom"


class Method(str, Enum):
    GRACE = "grace"
    GRACER = "gracer"
    GRACEI = "gracei"
    RIDGE = "ridge"


class Correction(str, Enum):
    NONE = "none"
    BY = "by"
    HOLM = "holm"


class BoundVariant(str, Enum):
    OFFDIAG = "offdiag"
    FULLROW = "fullrow"


class WeightedGraph(BaseModel):
    """Undirected graph on nodes 0..num_nodes-1 (files use 1-based ids)."""

    model_config = ConfigDict(frozen=True)

    num_nodes: int = Field(..., gt=0)
    edges: Tuple[Tuple[int, int, float], ...] = ()

    @model_validator(mode="after")
    def check_edges(self) -> "WeightedGraph":
        seen: Set[Tuple[int, int]] = set()
        normalized = []
        for u, v, w in self.edges:
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise GraphError(
                    f"edge ({u + 1}, {v + 1}) outside node range 1..{self.num_nodes}"
                )
            if u == v:
                raise GraphError(f"self-loop on node {u + 1}")
            if w < 0 or math.isnan(w):
                raise GraphError(f"negative weight {w} on edge ({u + 1}, {v + 1})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge ({key[0] + 1}, {key[1] + 1})")
            seen.add(key)
            normalized.append((key[0], key[1], float(w)))
        object.__setattr__(self, "edges", tuple(normalized))
        return self

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_keys(self) -> Set[Tuple[int, int]]:
        return {(u, v) for u, v, _ in self.edges}

    def degrees(self) -> np.ndarray:
        degree = np.zeros(self.num_nodes)
        for u, v, w in self.edges:
            degree[u] += w
            degree[v] += w
        return degree


class PenaltyMatrix(BaseModel):
    model_config = ARRAY_CONFIG

    dim: int = Field(..., gt=0)
    entries: np.ndarray
    kind: PenaltyKind
    jitter: float = Field(default=0.0, ge=0)

    @field_validator("entries", mode="before")
    @classmethod
    def freeze_entries(cls, v):
        return _frozen_array(v, 2)

    @model_validator(mode="after")
    def check_symmetric(self) -> "PenaltyMatrix":
        if self.entries.shape != (self.dim, self.dim):
            raise DimensionError(
                f"penalty entries have shape {self.entries.shape}, expected {self.dim}x{self.dim}"
            )
        if not np.array_equal(self.entries, self.entries.T):
            raise DimensionError("penalty matrix must be exactly symmetric")
        return self


class RegressionData(BaseModel):
    model_config = ARRAY_CONFIG

    X: np.ndarray
    y: np.ndarray
    standardized: bool = False

    @field_validator("X", mode="before")
    @classmethod
    def freeze_x(cls, v):
        return _frozen_array(v, 2)

    @field_validator("y", mode="before")
    @classmethod
    def freeze_y(cls, v):
        return _frozen_array(np.ravel(np.asarray(v, dtype=float)), 1)

    @model_validator(mode="after")
    def check_shapes(self) -> "RegressionData":
        if self.X.shape[0] != self.y.shape[0]:
            raise DimensionError(
                f"X has {self.X.shape[0]} rows but y has {self.y.shape[0]} entries"
            )
        return self

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def gram(self) -> np.ndarray:
        return self.X.T @ self.X

    def sample_covariance(self) -> np.ndarray:
        return self.gram() / self.n


class Standardization(BaseModel):
    """Centering/scaling constants mapping raw data to the standardized scale."""

    model_config = ARRAY_CONFIG

    x_center: np.ndarray
    x_scale: np.ndarray
    y_center: float

    @field_validator("x_center", "x_scale", mode="before")
    @classmethod
    def freeze(cls, v):
        return _frozen_array(v, 1)

    def transform_x(self, X_raw: np.ndarray) -> np.ndarray:
        return (np.asarray(X_raw, dtype=float) - self.x_center) / self.x_scale

    def transform_y(self, y_raw: np.ndarray) -> np.ndarray:
        return np.asarray(y_raw, dtype=float) - self.y_center

    def coefficients_to_raw(self, beta: np.ndarray) -> Tuple[float, np.ndarray]:
        raw = np.asarray(beta, dtype=float) / self.x_scale
        intercept = float(self.y_center - self.x_center @ raw)
        return intercept, raw


class LassoFit(BaseModel):
    model_config = ARRAY_CONFIG

    beta: np.ndarray
    lam: float = Field(..., ge=0)
    iterations: int
    converged: bool
    objective_trace: Tuple[float, ...] = ()

    @field_validator("beta", mode="before")
    @classmethod
    def freeze_beta(cls, v):
        return _frozen_array(v, 1)


class NoiseEstimate(BaseModel):
    model_config = ARRAY_CONFIG

    sigma: float = Field(..., gt=0)
    beta: np.ndarray
    lambda0: float
    iterations: int
    converged: bool

    @field_validator("beta", mode="before")
    @classmethod
    def freeze_beta(cls, v):
        return _frozen_array(v, 1)


class GracePenaltySpec(BaseModel):
    """Effective penalty M = h_g * L + h_2 * I."""

    model_config = ARRAY_CONFIG

    penalty: Optional[PenaltyMatrix] = None
    h_g: float = Field(default=0.0, ge=0)
    h_2: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_penalty(self) -> "GracePenaltySpec":
        if self.h_g > 0 and self.penalty is None:
            raise ValueError("h_g > 0 requires a penalty matrix")
        return self

    def effective_matrix(self, p: int) -> np.ndarray:
        matrix = self.h_2 * np.eye(p)
        if self.h_g > 0:
            if self.penalty.dim != p:
                raise DimensionError(
                    f"penalty dimension {self.penalty.dim} does not match p={p}"
                )
            matrix = matrix + self.h_g * self.penalty.entries
        return matrix


class FitResult(BaseModel):
    model_config = ARRAY_CONFIG

    beta_hat: np.ndarray
    spec: GracePenaltySpec
    factor: Any
    sigma_eps: Optional[float] = Field(default=None, gt=0)
    residual: float = 0.0

    @field_validator("beta_hat", mode="before")
    @classmethod
    def freeze_beta(cls, v):
        return _frozen_array(v, 1)

    @property
    def p(self) -> int:
        return self.beta_hat.shape[0]


class TestConfig(BaseModel):
    __test__ = False

    model_config = ConfigDict(frozen=True)

    xi: float = Field(default=0.05, gt=0, lt=0.5)
    bound_variant: BoundVariant = BoundVariant.OFFDIAG
    scale_invariant: bool = False
    alpha: float = Field(default=0.05, gt=0, lt=1)
    correction: Correction = Correction.BY


class CovariateResult(BaseModel):
    covariate: str
    z_hat: float
    gamma: float = Field(..., ge=0)
    sd: float = Field(..., ge=0)
    p_raw: float = Field(..., ge=0, le=1)
    p_adj: float = Field(..., ge=0, le=1)
    rejected: bool


class TestReport(BaseModel):
    __test__ = False

    rows: List[CovariateResult]
    method: Method
    correction: Correction
    alpha: float
    sigma_used: float
    h_g: float = 0.0
    h_2: float = 0.0
    warnings: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_rows(self) -> "TestReport":
        for row in self.rows:
            if abs(row.z_hat) <= row.gamma and row.p_raw != 1.0:
                raise ValueError(f"{row.covariate}: |z| <= gamma requires p_raw = 1")
            if row.p_adj < row.p_raw:
                raise ValueError(f"{row.covariate}: adjusted p-value below raw p-value")
            if row.rejected != (row.p_adj <= self.alpha):
                raise ValueError(f"{row.covariate}: rejection flag inconsistent with alpha")
        return self

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])

    @property
    def rejections(self) -> int:
        return sum(1 for row in self.rows if row.rejected)


class CvPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    folds: int = Field(default=10, ge=2)
    grid_g: Tuple[float, ...]
    grid_2: Tuple[float, ...]
    seed: int = 0
    loss: Literal["prediction_sse"] = "prediction_sse"

    @field_validator("grid_g", "grid_2")
    @classmethod
    def check_grid(cls, v):
        if not v:
            raise ValueError("tuning grid must not be empty")
        if any(value < 0 or math.isnan(value) for value in v):
            raise ValueError("tuning grid values must be nonnegative")
        if list(v) != sorted(v):
            raise ValueError("tuning grid must be sorted ascending")
        return tuple(float(value) for value in v)


class CvRecord(BaseModel):
    h_g: float
    h_2: float
    cv_error: float


class CvResult(BaseModel):
    h_g: float
    h_2: float
    cv_error: float
    table: List[CvRecord]
    failed_points: int = 0
    warnings: List[str] = Field(default_factory=list)


class SimDesign(BaseModel):
    model_config = ConfigDict(frozen=True)

    hubs: int = Field(default=50, ge=1)
    satellites_per_hub: int = Field(default=9, ge=0)
    n: int = Field(default=100, ge=4)
    signal_count: int = Field(default=10, ge=0)
    signal_value: float = 1 / math.sqrt(10)
    sigma_eps: float = Field(default=4.8, gt=0)
    r2_label: Optional[float] = None
    npe_list: Tuple[int, ...] = (0,)
    replicates: int = Field(default=20, ge=1)
    seed: int = 0

    @property
    def p(self) -> int:
        return self.hubs * (1 + self.satellites_per_hub)

    @model_validator(mode="after")
    def check_signal(self) -> "SimDesign":
        if self.signal_count > self.p:
            raise ValueError("signal_count exceeds the number of covariates")
        return self

    def beta_star(self) -> np.ndarray:
        beta = np.zeros(self.p)
        beta[: self.signal_count] = self.signal_value
        return beta


class SimRecord(BaseModel):
    method: Method
    npe: int
    r2: float
    power_mean: Optional[float] = None
    power_se: Optional[float] = None
    level_mean: Optional[float] = None
    level_se: Optional[float] = None
    replicates: int = 0
    failures: int = 0


class SimReport(BaseModel):
    records: List[SimRecord]
    warnings: List[str] = Field(default_factory=list)
    details: List[Dict[str, Any]] = Field(default_factory=list)


class GraphSummary(BaseModel):
    num_nodes: int
    num_edges: int
    isolated_nodes: int
    components: int
    min_degree: float
    max_degree: float
    total_weight: float
    laplacian_norm: float


class InitialEstimates(BaseModel):
    """Noise level and lasso initial estimate feeding the bias correction."""

    model_config = ARRAY_CONFIG

    sigma: float = Field(..., gt=0)
    beta_tilde: np.ndarray
    lasso_lambda: float
    lambda0: float

    @field_validator("beta_tilde", mode="before")
    @classmethod
    def freeze_beta(cls, v):
        return _frozen_array(v, 1)


class GraceTestRun(BaseModel):
    report: TestReport
    initial: InitialEstimates
    cv: Optional[CvResult] = None


class GridSpec(BaseModel):
    """``count`` log-spaced values from ``lo`` to ``hi`` (``--grid-g LO:HI:N``)."""

    model_config = ConfigDict(frozen=True)

    lo: float = Field(default=1e-2, gt=0)
    hi: float = Field(default=1e6, gt=0)
    count: int = Field(default=20, ge=1)

    @model_validator(mode="after")
    def check_bounds(self) -> "GridSpec":
        if self.hi < self.lo:
            raise ValueError("grid upper end must not be below the lower end")
        if self.count == 1 and self.hi != self.lo:
            raise ValueError("a one-point grid needs LO == HI")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like LO:HI:N, got '{text}'")
        return cls(lo=float(parts[0]), hi=float(parts[1]), count=int(parts[2]))

    def values(self) -> Tuple[float, ...]:
        return tuple(float(v) for v in np.geomspace(self.lo, self.hi, self.count))


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["test", "simulate", "figure1", "graph-info"]
    x_path: Optional[str] = None
    y_path: Optional[str] = None
    edges_path: Optional[str] = None
    compare_edges_path: Optional[str] = None
    method: Method = Method.GRACE
    methods: Tuple[Method, ...] = (Method.GRACE, Method.GRACER, Method.GRACEI, Method.RIDGE)
    penalty: PenaltyKind = PenaltyKind.LAPLACIAN
    jitter: Optional[float] = Field(default=None, ge=0)
    xi: float = Field(default=0.05, gt=0, lt=0.5)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    correction: Correction = Correction.BY
    bound: BoundVariant = BoundVariant.OFFDIAG
    scale_invariant: bool = False
    grid_g: GridSpec = GridSpec()
    grid_2: GridSpec = GridSpec()
    folds: int = Field(default=10, ge=2)
    seed: int = Field(..., ge=0)
    seed_generated: bool = False
    out_dir: str = "."
    threads: int = Field(default=1, ge=1)
    replicates: int = Field(default=20, ge=1)
    npe_list: Tuple[int, ...] = (0,)
    r2_list: Tuple[float, ...] = (0.3,)
    hubs: int = Field(default=50, ge=1)
    details: bool = False
    k: float = Field(default=10.0, ge=0)
    t: float = Field(default=0.25, ge=0)
    beta1: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def check_mode_fields(self) -> "RunConfig":
        missing: List[str] = []
        if self.mode == "test":
            missing = [
                flag
                for flag, value in (("--x", self.x_path), ("--y", self.y_path))
                if value is None
            ]
            if self.penalty != PenaltyKind.IDENTITY and self.method in (
                Method.GRACE,
                Method.GRACER,
            ) and self.edges_path is None:
                missing.append("--edges")
        elif self.mode == "graph-info" and self.edges_path is None:
            missing.append("--edges")
        if missing:
            raise ValueError(f"mode '{self.mode}' requires {', '.join(missing)}")
        return self

    def test_config(self) -> TestConfig:
        return TestConfig(
            xi=self.xi,
            bound_variant=self.bound,
            scale_invariant=self.scale_invariant,
            alpha=self.alpha,
            correction=self.correction,
        )
