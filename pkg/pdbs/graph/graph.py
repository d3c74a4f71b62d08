"""
Undirected simple graph over [n] stored as n bitset rows.

Row i is a Python int whose bit j is set iff {i, j} is an edge; degrees and block
sums reduce to int.bit_count. A dense numpy view is built lazily for vectorized
kernels. Graph values are immutable; "mutations" return new graphs.
"""

from functools import cached_property, lru_cache
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from pdbs.errors import ParameterError


@lru_cache(maxsize=8)
def canonical_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row-major (i < j) pair order shared by samplers, enumerators and masks."""
    iu, ju = np.triu_indices(n, k=1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


def pair_index(n: int, i: int, j: int) -> int:
    """Position of {i, j} in the canonical pair order."""
    if i > j:
        i, j = j, i
    if not 0 <= i < j < n:
        raise ParameterError(f"invalid pair ({i}, {j}) for n={n}")
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


class Graph:
    """Immutable symmetric bit-matrix graph without self-loops."""

    def __init__(self, n: int, rows: Sequence[int]):
        if n < 1:
            raise ParameterError(f"vertex count must be positive, got {n}")
        if len(rows) != n:
            raise ParameterError(f"expected {n} rows, got {len(rows)}")
        full = (1 << n) - 1
        for i, row in enumerate(rows):
            if row < 0 or row & ~full:
                raise ParameterError(f"row {i} has bits outside [0, {n})")
            if (row >> i) & 1:
                raise ParameterError(f"self-loop at vertex {i}")
        self._n = n
        self._rows = tuple(int(r) for r in rows)
        for i, row in enumerate(self._rows):
            rest = row >> (i + 1)
            j = i + 1
            while rest:
                if rest & 1 and not (self._rows[j] >> i) & 1:
                    raise ParameterError(f"adjacency not symmetric at ({i}, {j})")
                rest >>= 1
                j += 1

    @classmethod
    def _trusted(cls, n: int, rows: Tuple[int, ...]) -> "Graph":
        g = cls.__new__(cls)
        g._n = n
        g._rows = rows
        return g

    # --- constructors ---

    @classmethod
    def empty(cls, n: int) -> "Graph":
        if n < 1:
            raise ParameterError(f"vertex count must be positive, got {n}")
        return cls._trusted(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        if n < 1:
            raise ParameterError(f"vertex count must be positive, got {n}")
        full = (1 << n) - 1
        return cls._trusted(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        if n < 1:
            raise ParameterError(f"vertex count must be positive, got {n}")
        rows = [0] * n
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ParameterError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ParameterError(f"self-loop at vertex {i}")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls._trusted(n, tuple(rows))

    @classmethod
    def from_dense(cls, adj: np.ndarray, *, check: bool = True) -> "Graph":
        """Build from a square 0/1 matrix; rows are packed little-endian."""
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ParameterError(f"adjacency must be square, got shape {adj.shape}")
        if check:
            if adj.diagonal().any():
                raise ParameterError("adjacency has self-loops")
            if not np.array_equal(adj, adj.T):
                raise ParameterError("adjacency is not symmetric")
        n = adj.shape[0]
        packed = np.packbits(adj, axis=1, bitorder="little")
        rows = tuple(int.from_bytes(r.tobytes(), "little") for r in packed)
        g = cls._trusted(n, rows)
        g.__dict__["dense"] = _freeze(adj.astype(np.int32))
        return g

    @classmethod
    def from_pair_mask(cls, n: int, mask: int) -> "Graph":
        """Inverse of pair_mask(): bit t set iff the t-th canonical pair is an edge."""
        iu, ju = canonical_pairs(n)
        rows = [0] * n
        t = 0
        while mask:
            if mask & 1:
                i, j = int(iu[t]), int(ju[t])
                rows[i] |= 1 << j
                rows[j] |= 1 << i
            mask >>= 1
            t += 1
        return cls._trusted(n, tuple(rows))

    # --- queries ---

    @property
    def n(self) -> int:
        return self._n

    @property
    def rows(self) -> Tuple[int, ...]:
        return self._rows

    def _check_vertex(self, i: int) -> None:
        if not 0 <= i < self._n:
            raise IndexError(f"vertex {i} not in [0, {self._n})")

    def has_edge(self, i: int, j: int) -> bool:
        self._check_vertex(i)
        self._check_vertex(j)
        return bool((self._rows[i] >> j) & 1)

    def degree(self, i: int) -> int:
        self._check_vertex(i)
        return self._rows[i].bit_count()

    def degrees(self) -> List[int]:
        return [r.bit_count() for r in self._rows]

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    @cached_property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self._rows) // 2

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Edges (i, j) with i < j in lexicographic order."""
        for i, row in enumerate(self._rows):
            rest = row >> (i + 1)
            j = i + 1
            while rest:
                if rest & 1:
                    yield i, j
                rest >>= 1
                j += 1

    def block_sum(self, right: Iterable[int], left: Iterable[int]) -> int:
        """Number of edges between two vertex sets."""
        mask = 0
        for v in left:
            mask |= 1 << v
        return sum((self._rows[i] & mask).bit_count() for i in right)

    @cached_property
    def dense(self) -> np.ndarray:
        """Read-only int32 adjacency matrix."""
        n = self._n
        nbytes = (n + 7) // 8
        buf = np.frombuffer(b"".join(r.to_bytes(nbytes, "little") for r in self._rows), dtype=np.uint8)
        bits = np.unpackbits(buf.reshape(n, nbytes), axis=1, bitorder="little")[:, :n]
        return _freeze(bits.astype(np.int32))

    def pair_mask(self) -> int:
        """Edge indicator over the canonical pair order as one integer."""
        mask = 0
        for i, j in self.edges():
            mask |= 1 << pair_index(self._n, i, j)
        return mask

    # --- derived graphs ---

    def with_edge(self, i: int, j: int) -> "Graph":
        self._check_vertex(i)
        self._check_vertex(j)
        if i == j:
            raise ParameterError(f"self-loop at vertex {i}")
        rows = list(self._rows)
        rows[i] |= 1 << j
        rows[j] |= 1 << i
        return Graph._trusted(self._n, tuple(rows))

    def permuted(self, perm: Sequence[int]) -> "Graph":
        """Relabel vertex v as perm[v]."""
        if sorted(perm) != list(range(self._n)):
            raise ParameterError("perm must be a permutation of [0, n)")
        return Graph.from_edges(self._n, ((perm[i], perm[j]) for i, j in self.edges()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._n, self._rows))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={self.edge_count})"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# Module-level accessors mirroring the operation names.

def edge_count(graph: Graph) -> int:
    return graph.edge_count


def max_degree(graph: Graph) -> int:
    return graph.max_degree()


def degree(graph: Graph, i: int) -> int:
    return graph.degree(i)
