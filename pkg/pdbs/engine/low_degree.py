"""
Degree-D projection of the likelihood ratio over G(n,q).

Characters chi_alpha(G) = prod_{(i,j) in alpha} (A_ij - q) / sqrt(q(1-q)) form an
orthonormal basis under H0, and the coefficient of the likelihood ratio on
chi_alpha is lambda^{|alpha|/2} * P[alpha ⊆ K_{R,L}] with lambda = chi2(p||q).
Only bipartite alpha can sit inside a bipartite block, so

    ||L_{<=D}||^2 = 1 + sum_{bipartite alpha, 1 <= |alpha| <= D} lambda^|alpha| P[alpha ⊆ K]^2

The containment probability depends on alpha only through the side sizes of
its components, so the norm is accumulated per shape class.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms import bipartite

from pdbs.config import settings
from pdbs.errors import ParameterError
from pdbs.engine.measures import chi2_bernoulli
from pdbs.graph.graph import Graph, canonical_pairs
from pdbs.graph.placements import check_budget
from pdbs.models.canonical import LdlrReport, ModelParams
from pdbs.workers.pool import parallel_map

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Shape = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class EdgeSubset:
    """An edge-induced subgraph alpha over [n]; edges are stored as sorted (i < j) pairs."""

    edges: Tuple[Edge, ...]

    def __post_init__(self):
        normalized = set()
        for i, j in self.edges:
            if i == j:
                raise ParameterError(f"self-loop at vertex {i}")
            if i < 0 or j < 0:
                raise ParameterError(f"negative vertex in edge ({i}, {j})")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @classmethod
    def of(cls, *edges: Edge) -> "EdgeSubset":
        return cls(tuple(edges))

    def __len__(self) -> int:
        return len(self.edges)

    @cached_property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(sorted({v for e in self.edges for v in e}))

    @cached_property
    def nx_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_edges_from(self.edges)
        return graph

    @cached_property
    def components(self) -> Tuple[Tuple[int, ...], ...]:
        """Connected components, each sorted, ordered by smallest vertex."""
        return tuple(sorted(tuple(sorted(comp)) for comp in nx.connected_components(self.nx_graph)))

    def relabeled(self, perm: Sequence[int]) -> "EdgeSubset":
        return EdgeSubset(tuple((perm[i], perm[j]) for i, j in self.edges))


@dataclass(frozen=True)
class BipartiteCert:
    """Two-colouring per component; side0 holds the component's smallest vertex."""

    sides: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]

    @property
    def component_count(self) -> int:
        return len(self.sides)

    @property
    def shape(self) -> Shape:
        """Orientation-free side sizes, the key of the containment probability."""
        return tuple(sorted((min(len(a), len(b)), max(len(a), len(b))) for a, b in self.sides))


def is_bipartite(alpha: EdgeSubset) -> Optional[BipartiteCert]:
    """2-colouring per component; None when alpha contains an odd cycle."""
    try:
        colour = bipartite.color(alpha.nx_graph)
    except nx.NetworkXError:
        return None
    sides = []
    for comp in alpha.components:
        flip = colour[comp[0]]
        side0 = tuple(v for v in comp if colour[v] == flip)
        side1 = tuple(v for v in comp if colour[v] != flip)
        sides.append((side0, side1))
    return BipartiteCert(sides=tuple(sides))


def _comb(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=4096)
def _containment(shape: Shape, n: int, k_r: int, k_l: int) -> Fraction:
    v = sum(a + b for a, b in shape)
    if v > k_r + k_l:
        return Fraction(0)
    # distribution of |A| (vertices sent to the R side) over the 2^c orientations
    dist: Counter = Counter({0: 1})
    for a, b in shape:
        nxt: Counter = Counter()
        for size, mult in dist.items():
            nxt[size + a] += mult
            nxt[size + b] += mult
        dist = nxt
    hits = 0
    for size_a, mult in dist.items():
        size_b = v - size_a
        hits += mult * _comb(n - v, k_r - size_a) * _comb(n - k_r - size_b, k_l - size_b)
    return Fraction(hits, math.comb(n, k_r) * math.comb(n - k_r, k_l))


def prob_contains(alpha: EdgeSubset, params: ModelParams) -> Fraction:
    """
    Exact P[alpha ⊆ K_{R,L}] under the uniform placement prior.

    Each component can be oriented two ways (which colour class lies in R); the
    2^c orientation events are disjoint, and for a fixed orientation with R-side
    A and L-side B the number of placements is C(n-v, kR-|A|) * C(n-kR-|B|, kL-|B|).
    """
    if not alpha.edges:
        return Fraction(1)
    if alpha.vertices[-1] >= params.n:
        raise ParameterError(f"edge subset uses vertex {alpha.vertices[-1]} outside [0, {params.n})")
    cert = is_bipartite(alpha)
    if cert is None:
        return Fraction(0)
    return _containment(cert.shape, params.n, params.k_r, params.k_l)


def _lambda(params: ModelParams, lam: Optional[float]) -> float:
    if lam is None:
        return chi2_bernoulli(params.p, params.q)
    if lam < 0:
        raise ParameterError(f"lambda must be non-negative, got {lam}")
    return float(lam)


def fourier_coefficient(alpha: EdgeSubset, params: ModelParams, lam: Optional[float] = None) -> float:
    """E_H1[chi_alpha] = lambda^{|alpha|/2} * P[alpha ⊆ K]."""
    lam = _lambda(params, lam)
    return lam ** (len(alpha) / 2) * float(prob_contains(alpha, params))


def character_value(alpha: EdgeSubset, graph: Graph, q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie in (0,1), got {q}")
    scale = math.sqrt(q * (1.0 - q))
    value = 1.0
    for i, j in alpha.edges:
        value *= (graph.has_edge(i, j) - q) / scale
    return value


# ---------- Enumeration ----------


class _ParityForest:
    """Union-find with parity and rollback (no path compression)."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.parity = [0] * n
        self.size = [1] * n
        self.history: List[Optional[Tuple[int, int]]] = []

    def _find(self, v: int) -> Tuple[int, int]:
        par = 0
        while self.parent[v] != v:
            par ^= self.parity[v]
            v = self.parent[v]
        return v, par

    def add_edge(self, u: int, v: int) -> bool:
        """Join u and v on opposite sides; False (and no change) on an odd cycle."""
        ru, pu = self._find(u)
        rv, pv = self._find(v)
        if ru == rv:
            if pu == pv:
                return False
            self.history.append(None)
            return True
        if self.size[ru] < self.size[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.parity[rv] = pu ^ pv ^ 1
        self.size[ru] += self.size[rv]
        self.history.append((ru, rv))
        return True

    def rollback(self) -> None:
        record = self.history.pop()
        if record is None:
            return
        ru, rv = record
        self.parent[rv] = rv
        self.parity[rv] = 0
        self.size[ru] -= self.size[rv]


def _subsets_from(
    n: int,
    max_edges: int,
    first: int,
    prune: bool,
    max_vertices: Optional[int],
) -> Iterator[Tuple[int, ...]]:
    """Non-empty subsets (as canonical pair indices) whose smallest index is `first`."""
    iu, ju = canonical_pairs(n)
    m = iu.size
    forest = _ParityForest(n)
    touched = [0] * n
    chosen: List[int] = []
    vertex_count = 0

    def push(t: int) -> bool:
        nonlocal vertex_count
        u, v = int(iu[t]), int(ju[t])
        if prune and not forest.add_edge(u, v):
            return False
        added = (touched[u] == 0) + (touched[v] == 0)
        if max_vertices is not None and vertex_count + added > max_vertices:
            if prune:
                forest.rollback()
            return False
        touched[u] += 1
        touched[v] += 1
        vertex_count += added
        chosen.append(t)
        return True

    def pop() -> None:
        nonlocal vertex_count
        t = chosen.pop()
        u, v = int(iu[t]), int(ju[t])
        touched[u] -= 1
        touched[v] -= 1
        vertex_count -= (touched[u] == 0) + (touched[v] == 0)
        if prune:
            forest.rollback()

    def extend(start: int) -> Iterator[Tuple[int, ...]]:
        yield tuple(chosen)
        if len(chosen) == max_edges:
            return
        for t in range(start, m):
            if push(t):
                yield from extend(t + 1)
                pop()

    if max_edges >= 1 and push(first):
        yield from extend(first + 1)
        pop()


def _to_edge_subset(n: int, indices: Tuple[int, ...]) -> EdgeSubset:
    iu, ju = canonical_pairs(n)
    return EdgeSubset(tuple((int(iu[t]), int(ju[t])) for t in indices))


def enumerate_edge_subsets(
    n: int,
    max_edges: int,
    prune: bool = True,
    max_vertices: Optional[int] = None,
) -> Iterator[EdgeSubset]:
    """
    Every edge subset with 1..max_edges edges, depth-first over the canonical pair
    order. With prune=True, branches that close an odd cycle are cut at the
    first offending edge; max_vertices cuts branches touching too many vertices.
    """
    if n < 1 or max_edges < 0:
        raise ParameterError(f"invalid enumeration request n={n}, max_edges={max_edges}")
    for first in range(n * (n - 1) // 2):
        for indices in _subsets_from(n, max_edges, first, prune, max_vertices):
            yield _to_edge_subset(n, indices)


def projected_subset_count(n: int, max_edges: int) -> int:
    m = n * (n - 1) // 2
    return sum(math.comb(m, j) for j in range(min(max_edges, m) + 1))


@dataclass
class _ShapeTally:
    classes: Counter  # (|alpha|, shape or None) -> count
    visited: Counter  # |alpha| -> subsets visited


def _tally(params: ModelParams, max_edges: int, prune: bool, threads: int) -> _ShapeTally:
    n = params.n
    max_vertices = params.k_r + params.k_l if prune else None

    def tally_first(first: int) -> Tuple[Counter, Counter]:
        classes: Counter = Counter()
        visited: Counter = Counter()
        for indices in _subsets_from(n, max_edges, first, prune, max_vertices):
            cert = is_bipartite(_to_edge_subset(n, indices))
            classes[(len(indices), cert.shape if cert else None)] += 1
            visited[len(indices)] += 1
        return classes, visited

    classes: Counter = Counter()
    visited: Counter = Counter()
    for part_classes, part_visited in parallel_map(tally_first, range(n * (n - 1) // 2), threads):
        classes.update(part_classes)
        visited.update(part_visited)
    return _ShapeTally(classes=classes, visited=visited)


def _increments(params: ModelParams, tally: _ShapeTally, lam: float, max_edges: int) -> Dict[int, float]:
    per_size: Dict[int, List[float]] = {size: [] for size in range(1, max_edges + 1)}
    for (size, shape), count in sorted(tally.classes.items(), key=lambda kv: (kv[0][0], kv[0][1] or ())):
        if shape is None:
            # odd cycle: coefficient is exactly zero
            continue
        prob = _containment(shape, params.n, params.k_r, params.k_l)
        if prob:
            per_size[size].append(count * lam**size * float(prob * prob))
    return {size: math.fsum(terms) for size, terms in per_size.items()}


def ldlr_curve(
    params: ModelParams,
    max_degree: int,
    budget: Optional[int] = None,
    lam: Optional[float] = None,
    prune: bool = True,
    threads: int = 1,
) -> List[LdlrReport]:
    """Reports for D = 0..max_degree from a single enumeration."""
    if max_degree < 0:
        raise ParameterError(f"degree must be non-negative, got {max_degree}")
    lam = _lambda(params, lam)
    budget = settings.ldlr_budget if budget is None else budget
    check_budget("ldlr_norm_sq", projected_subset_count(params.n, max_degree), budget)

    tally = _tally(params, max_degree, prune, threads)
    increments = _increments(params, tally, lam, max_degree)
    logger.debug(f"ldlr_curve: {sum(tally.visited.values())} subsets in {len(tally.classes)} classes")

    reports = []
    for degree in range(max_degree + 1):
        kept = {size: increments[size] for size in range(1, degree + 1)}
        reports.append(
            LdlrReport(
                degree=degree,
                norm_sq=1.0 + math.fsum(kept.values()),
                terms_enumerated=sum(tally.visited[size] for size in range(1, degree + 1)),
                increments=kept,
            )
        )
    return reports


def ldlr_norm_sq(
    params: ModelParams,
    degree: int,
    budget: Optional[int] = None,
    lam: Optional[float] = None,
    prune: bool = True,
    threads: int = 1,
) -> LdlrReport:
    """
    ||L_{n,<=D}||^2 for D = degree.

    Raises:
        BudgetExceeded: when sum_{j<=D} C(C(n,2), j) exceeds budget
    """
    return ldlr_curve(params, degree, budget=budget, lam=lam, prune=prune, threads=threads)[-1]
