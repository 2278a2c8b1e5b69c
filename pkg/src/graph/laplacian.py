from __future__ import annotations

import numpy as np

from src.errors import DimensionError, GraphError
from src.models import PenaltyKind, PenaltyMatrix, WeightedGraph

GRACE_JITTER = 0.01
NORMALIZED_JITTER = 0.001
SYMMETRY_TOLERANCE = 1e-10


def _check_jitter(jitter: float) -> float:
    if jitter < 0 or np.isnan(jitter):
        raise ValueError(f"jitter must be nonnegative, got {jitter}")
    return float(jitter)


def _raw_laplacian(g: WeightedGraph) -> np.ndarray:
    matrix = np.zeros((g.num_nodes, g.num_nodes))
    for u, v, w in g.edges:
        matrix[u, v] -= w
        matrix[v, u] -= w
        matrix[u, u] += w
        matrix[v, v] += w
    return matrix


def laplacian(g: WeightedGraph, jitter: float = 0.0) -> PenaltyMatrix:
    """Degree matrix minus weighted adjacency, plus ``jitter`` on the diagonal."""
    jitter = _check_jitter(jitter)
    entries = _raw_laplacian(g)
    entries[np.diag_indices_from(entries)] += jitter
    return PenaltyMatrix(
        dim=g.num_nodes, entries=entries, kind=PenaltyKind.LAPLACIAN, jitter=jitter
    )


def normalized_laplacian(g: WeightedGraph, jitter: float = 0.0) -> PenaltyMatrix:
    """D^-1/2 L D^-1/2; isolated nodes get zero rows and columns before jitter."""
    jitter = _check_jitter(jitter)
    degree = g.degrees()
    scale = np.zeros_like(degree)
    connected = degree > 0
    scale[connected] = 1.0 / np.sqrt(degree[connected])
    entries = _raw_laplacian(g) * np.outer(scale, scale)
    entries[np.diag_indices_from(entries)] = np.where(connected, 1.0, 0.0)
    entries = 0.5 * (entries + entries.T)
    entries[np.diag_indices_from(entries)] += jitter
    return PenaltyMatrix(
        dim=g.num_nodes,
        entries=entries,
        kind=PenaltyKind.NORMALIZED_LAPLACIAN,
        jitter=jitter,
    )


def identity_penalty(p: int) -> PenaltyMatrix:
    if p < 1:
        raise ValueError(f"identity penalty needs p >= 1, got {p}")
    return PenaltyMatrix(dim=p, entries=np.eye(p), kind=PenaltyKind.IDENTITY)


def custom_penalty(matrix: np.ndarray) -> PenaltyMatrix:
    """Accept a user kernel after a symmetry check; positive semidefiniteness is the caller's job."""
    entries = np.asarray(matrix, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DimensionError(f"penalty kernel must be square, got shape {entries.shape}")
    scale = max(float(np.max(np.abs(entries))), 1.0)
    if not np.allclose(entries, entries.T, rtol=0.0, atol=SYMMETRY_TOLERANCE * scale):
        raise DimensionError("penalty kernel is not symmetric")
    entries = 0.5 * (entries + entries.T)
    return PenaltyMatrix(dim=entries.shape[0], entries=entries, kind=PenaltyKind.CUSTOM)


def build_penalty(
    kind: PenaltyKind, g: WeightedGraph | None, p: int, jitter: float = 0.0
) -> PenaltyMatrix:
    if kind == PenaltyKind.IDENTITY:
        return identity_penalty(p)
    if g is None:
        raise GraphError(f"penalty kind '{kind.value}' needs a graph")
    if g.num_nodes != p:
        raise DimensionError(f"graph has {g.num_nodes} nodes but data has p={p}")
    if kind == PenaltyKind.LAPLACIAN:
        return laplacian(g, jitter)
    if kind == PenaltyKind.NORMALIZED_LAPLACIAN:
        return normalized_laplacian(g, jitter)
    raise ValueError(f"cannot build a '{kind.value}' penalty from a graph")


def with_jitter(penalty: PenaltyMatrix, jitter: float) -> PenaltyMatrix:
    """Copy of ``penalty`` with ``jitter`` added to its diagonal."""
    jitter = _check_jitter(jitter)
    if jitter == 0:
        return penalty
    entries = np.array(penalty.entries)
    entries[np.diag_indices_from(entries)] += jitter
    return PenaltyMatrix(
        dim=penalty.dim,
        entries=entries,
        kind=penalty.kind,
        jitter=penalty.jitter + jitter,
    )


def spectral_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix, ord=2))


def spectral_distance(a: PenaltyMatrix, b: PenaltyMatrix) -> float:
    """||a - b||_2 / ||b||_2."""
    if a.dim != b.dim:
        raise DimensionError(f"penalty dimensions differ: {a.dim} vs {b.dim}")
    denominator = spectral_norm(b.entries)
    if denominator == 0:
        raise ValueError("spectral distance undefined for a zero reference matrix")
    return spectral_norm(a.entries - b.entries) / denominator


def is_positive_semidefinite(penalty: PenaltyMatrix) -> bool:
    if penalty.dim == 0:
        return True
    smallest = float(np.linalg.eigvalsh(penalty.entries)[0])
    return smallest >= -1e-8 * max(spectral_norm(penalty.entries), 1e-300)
