"""
Edge-list text codec.

Format:
    n <N>
    i j          (one edge per line, 0 <= i < j < N, sorted)

Blank lines and '#' comments are ignored when parsing and never emitted. Parsing is
strict: tokens are ASCII decimal digits only (no sign, underscore or other
scripts), and a reversed pair or a line out of lexicographic order is an error.
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union

from pdbs.errors import GraphParseError
from pdbs.graph.graph import Graph


def serialize(graph: Graph) -> str:
    lines = [f"n {graph.n}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges())
    return "\n".join(lines) + "\n"


def parse(text: str) -> Graph:
    """
    Parse edge-list text into a Graph.

    Raises:
        GraphParseError: with the 1-based line number for malformed input,
            duplicate, reversed or out-of-order edges, self-loops and
            out-of-range vertices.
    """
    n = None
    edges: List[Tuple[int, int]] = []
    last: Optional[Tuple[int, int]] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()

        if n is None:
            if len(tokens) != 2 or tokens[0] != "n":
                raise GraphParseError(f"expected header 'n <N>', got {raw.strip()!r}", lineno)
            n = _parse_int(tokens[1], lineno)
            if n < 1:
                raise GraphParseError(f"vertex count must be positive, got {n}", lineno)
            continue

        if len(tokens) != 2:
            raise GraphParseError(f"expected 'i j', got {raw.strip()!r}", lineno)
        i, j = _parse_int(tokens[0], lineno), _parse_int(tokens[1], lineno)
        if i == j:
            raise GraphParseError(f"self-loop at vertex {i}", lineno)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphParseError(f"vertex out of range [0, {n}) in edge ({i}, {j})", lineno)
        if i > j:
            raise GraphParseError(f"reversed pair ({i}, {j}); write it as ({j}, {i})", lineno)
        if last is not None and (i, j) <= last:
            if (i, j) == last:
                raise GraphParseError(f"duplicate edge ({i}, {j})", lineno)
            raise GraphParseError(f"edge ({i}, {j}) out of order after {last}", lineno)
        edges.append((i, j))
        last = (i, j)

    if n is None:
        raise GraphParseError("missing header 'n <N>'")
    return Graph.from_edges(n, edges)


def _parse_int(token: str, lineno: int) -> int:
    if not (token.isascii() and token.isdecimal()):
        raise GraphParseError(f"not a non-negative integer: {token!r}", lineno)
    return int(token)


def read_graph(path: Union[str, Path]) -> Graph:
    return parse(Path(path).read_text(encoding="utf-8"))


def write_graph(graph: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize(graph), encoding="utf-8", newline="\n")
