"""
Ordered placements (R, L) of the planted block.

Enumeration is lexicographic over R, then over L drawn from [n] \\ R, which
mirrors the sampling order (R first, L from the complement).
"""

import math
from itertools import combinations
from typing import Iterator, List, Tuple

from pdbs.errors import BudgetExceeded, ParameterError
from pdbs.models.canonical import PlantedSets

Placement = Tuple[Tuple[int, ...], Tuple[int, ...]]


def placement_count(n: int, k_r: int, k_l: int) -> int:
    if k_r < 1 or k_l < 1 or k_r + k_l > n:
        raise ParameterError(f"invalid block sizes (k_r={k_r}, k_l={k_l}) for n={n}")
    return math.comb(n, k_r) * math.comb(n - k_r, k_l)


def check_budget(what: str, required: int, cap: int) -> None:
    if required > cap:
        raise BudgetExceeded(what, required, cap)


def iter_placements(n: int, k_r: int, k_l: int) -> Iterator[Placement]:
    placement_count(n, k_r, k_l)
    vertices = range(n)
    for right in combinations(vertices, k_r):
        taken = set(right)
        residual = [v for v in vertices if v not in taken]
        for left in combinations(residual, k_l):
            yield right, left


def placement_masks(n: int, k_r: int, k_l: int) -> Tuple[List[int], List[int]]:
    """Vertex bitmasks (R, L) for every placement, in enumeration order."""
    rights: List[int] = []
    lefts: List[int] = []
    for right, left in iter_placements(n, k_r, k_l):
        rights.append(sum(1 << v for v in right))
        lefts.append(sum(1 << v for v in left))
    return rights, lefts


def planted_pairs(planted: PlantedSets) -> List[Tuple[int, int]]:
    """E(K_{R,L}): every pair with one endpoint in R and the other in L, as (i<j), sorted."""
    pairs = {(min(r, l), max(r, l)) for r in planted.right for l in planted.left}
    return sorted(pairs)
