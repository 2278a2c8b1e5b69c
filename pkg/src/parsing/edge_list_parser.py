"""Edge-list files: ``nodes <p>`` header, then ``u v [w]`` per line, 1-based ids."""
from __future__ import annotations

from typing import List, Optional, Tuple

from src.errors import GraphError
from src.models import WeightedGraph
from src.utils.numbers import format_float, safe_float, safe_int

from .common import ParsingError, read_text

DEFAULT_WEIGHT = 1.0


def parse_edge_list(source, num_nodes: Optional[int] = None) -> WeightedGraph:
    text = read_text(source)
    declared: Optional[int] = None
    edges: List[Tuple[int, int, float]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if tokens[0].lower() == "nodes":
            if declared is not None:
                raise ParsingError("repeated 'nodes' header", line=line_no)
            if edges:
                raise ParsingError("'nodes' header must precede edges", line=line_no)
            if len(tokens) != 2 or safe_int(tokens[1]) is None or safe_int(tokens[1]) < 1:
                raise ParsingError("expected 'nodes <p>' with a positive integer", line=line_no)
            declared = safe_int(tokens[1])
            continue
        if declared is None:
            raise ParsingError("missing 'nodes <p>' header before first edge", line=line_no)
        if len(tokens) not in (2, 3):
            raise ParsingError(f"expected 'u v [w]', got {len(tokens)} fields", line=line_no)
        u, v = safe_int(tokens[0]), safe_int(tokens[1])
        if u is None:
            raise ParsingError(f"bad node id '{tokens[0]}'", line=line_no, column=1)
        if v is None:
            raise ParsingError(f"bad node id '{tokens[1]}'", line=line_no, column=2)
        weight = DEFAULT_WEIGHT
        if len(tokens) == 3:
            weight = safe_float(tokens[2])
            if weight is None:
                raise ParsingError(f"bad weight '{tokens[2]}'", line=line_no, column=3)
        if not (1 <= u <= declared and 1 <= v <= declared):
            raise GraphError(
                f"edge ({u}, {v}) on line {line_no} outside node range 1..{declared}"
            )
        edges.append((u - 1, v - 1, weight))

    if declared is None:
        raise ParsingError("missing 'nodes <p>' header")
    if num_nodes is not None and num_nodes != declared:
        raise GraphError(f"edge list declares {declared} nodes but data has p={num_nodes}")
    return WeightedGraph(num_nodes=declared, edges=tuple(edges))


def format_edge_list(g: WeightedGraph) -> str:
    lines = [f"nodes {g.num_nodes}"]
    for u, v, w in g.edges:
        weight = "" if w == DEFAULT_WEIGHT else f" {format_float(w)}"
        lines.append(f"{u + 1} {v + 1}{weight}")
    return "\n".join(lines) + "\n"
