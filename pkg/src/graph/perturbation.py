from __future__ import annotations

from typing import List, Set, Tuple

import numpy as np

from src.errors import GraphError
from src.models import WeightedGraph
from src.utils.logging import get_logger

logger = get_logger("graph.perturbation")

ADDED_EDGE_WEIGHT = 1.0


def _pair_count(p: int) -> int:
    return p * (p - 1) // 2


def _sample_absent_pairs(
    num_nodes: int, present: Set[Tuple[int, int]], count: int, rng: np.random.Generator
) -> List[Tuple[int, int]]:
    """Uniform draw of ``count`` distinct unordered pairs not in ``present``."""
    absent_total = _pair_count(num_nodes) - len(present)
    if count > absent_total // 2:
        # dense regime: enumerate the complement
        candidates = [
            (u, v)
            for u in range(num_nodes)
            for v in range(u + 1, num_nodes)
            if (u, v) not in present
        ]
        picks = rng.choice(len(candidates), size=count, replace=False)
        return [candidates[i] for i in sorted(picks)]

    chosen: List[Tuple[int, int]] = []
    taken = set(present)
    while len(chosen) < count:
        batch = rng.integers(0, num_nodes, size=(2 * (count - len(chosen)) + 8, 2))
        for u, v in batch:
            if u == v:
                continue
            key = (int(min(u, v)), int(max(u, v)))
            if key in taken:
                continue
            taken.add(key)
            chosen.append(key)
            if len(chosen) == count:
                break
    return chosen


def perturb_edges(g: WeightedGraph, npe: int, rng_seed: int) -> WeightedGraph:
    """Remove ``-npe`` edges or add ``npe`` unit-weight edges, uniformly at random."""
    if npe == 0:
        return g
    rng = np.random.default_rng(rng_seed)
    if npe < 0:
        if -npe > g.num_edges:
            raise GraphError(
                f"cannot remove {-npe} edges from a graph with {g.num_edges} edges"
            )
        drop = set(rng.choice(g.num_edges, size=-npe, replace=False).tolist())
        kept = tuple(edge for idx, edge in enumerate(g.edges) if idx not in drop)
        return WeightedGraph(num_nodes=g.num_nodes, edges=kept)

    free = _pair_count(g.num_nodes) - g.num_edges
    if npe > free:
        raise GraphError(f"cannot add {npe} edges; only {free} node pairs are free")
    added = _sample_absent_pairs(g.num_nodes, g.edge_keys(), npe, rng)
    edges = g.edges + tuple((u, v, ADDED_EDGE_WEIGHT) for u, v in added)
    return WeightedGraph(num_nodes=g.num_nodes, edges=edges)


def toggle_pairs(g: WeightedGraph, m: int, rng_seed: int) -> WeightedGraph:
    """Flip ``m`` distinct random node pairs: present edges go, absent pairs arrive with weight 1."""
    if m < 0:
        raise GraphError(f"toggle count must be nonnegative, got {m}")
    if m > _pair_count(g.num_nodes):
        raise GraphError(
            f"cannot toggle {m} pairs on {g.num_nodes} nodes "
            f"({_pair_count(g.num_nodes)} pairs exist)"
        )
    if m == 0:
        return g
    rng = np.random.default_rng(rng_seed)
    flipped = set(_sample_absent_pairs(g.num_nodes, set(), m, rng))
    kept = tuple(edge for edge in g.edges if (edge[0], edge[1]) not in flipped)
    present = g.edge_keys()
    added = tuple(
        (u, v, ADDED_EDGE_WEIGHT) for u, v in sorted(flipped) if (u, v) not in present
    )
    logger.debug(
        "Toggled %d pairs: %d removed, %d added",
        m,
        g.num_edges - len(kept),
        len(added),
    )
    return WeightedGraph(num_nodes=g.num_nodes, edges=kept + added)


def symmetric_difference_size(a: WeightedGraph, b: WeightedGraph) -> int:
    return len(a.edge_keys() ^ b.edge_keys())
