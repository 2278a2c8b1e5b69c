from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from src.graph.laplacian import laplacian, spectral_norm
from src.models import GraphSummary, WeightedGraph


def adjacency(g: WeightedGraph) -> coo_matrix:
    if not g.edges:
        return coo_matrix((g.num_nodes, g.num_nodes))
    rows, cols, weights = zip(*g.edges)
    return coo_matrix(
        (
            np.concatenate([weights, weights]),
            (np.concatenate([rows, cols]), np.concatenate([cols, rows])),
        ),
        shape=(g.num_nodes, g.num_nodes),
    )


def graph_summary(g: WeightedGraph) -> GraphSummary:
    degree = g.degrees()
    touched = np.zeros(g.num_nodes, dtype=bool)
    for u, v, _ in g.edges:
        touched[u] = touched[v] = True
    components, _ = connected_components(adjacency(g), directed=False)
    return GraphSummary(
        num_nodes=g.num_nodes,
        num_edges=g.num_edges,
        isolated_nodes=int((~touched).sum()),
        components=int(components),
        min_degree=float(degree.min()),
        max_degree=float(degree.max()),
        total_weight=float(sum(w for _, _, w in g.edges)),
        laplacian_norm=spectral_norm(laplacian(g).entries),
    )
