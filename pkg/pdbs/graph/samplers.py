"""
Samplers for the null G(n,q) and the planted PDBS(n,kR,kL,p,q) ensembles.

Each sampler is a pure function of (parameters, Seed). Draws come from the
seed's "graph" substream and are consumed in a fixed order:
    1. R (kR vertices), then L from [n] \\ R      (planted samplers only)
    2. one uniform per pair in the canonical row-major (i < j) order
    3. one uniform per planted pair, canonical order  (union sampler only)
"""

from typing import Tuple

import numpy as np

from pdbs.errors import ParameterError
from pdbs.graph.graph import Graph, canonical_pairs
from pdbs.models.canonical import ModelParams, PlantedSets, Seed

GRAPH_STREAM = "graph"


def _graph_from_pair_draws(n: int, present: np.ndarray) -> Graph:
    iu, ju = canonical_pairs(n)
    adj = np.zeros((n, n), dtype=bool)
    adj[iu[present], ju[present]] = True
    adj |= adj.T
    return Graph.from_dense(adj, check=False)


def _draw_planted_sets(params: ModelParams, rng: np.random.Generator) -> PlantedSets:
    right = np.sort(rng.choice(params.n, size=params.k_r, replace=False))
    residual = np.setdiff1d(np.arange(params.n), right, assume_unique=True)
    left = np.sort(rng.choice(residual, size=params.k_l, replace=False))
    return PlantedSets(right=right.tolist(), left=left.tolist())


def _planted_pair_mask(n: int, planted: PlantedSets) -> np.ndarray:
    iu, ju = canonical_pairs(n)
    in_r = np.zeros(n, dtype=bool)
    in_l = np.zeros(n, dtype=bool)
    in_r[planted.right] = True
    in_l[planted.left] = True
    return (in_r[iu] & in_l[ju]) | (in_l[iu] & in_r[ju])


def sample_er(n: int, q: float, seed: Seed) -> Graph:
    """G(n,q): each of the C(n,2) pairs is an edge independently with probability q."""
    if n < 1:
        raise ParameterError(f"vertex count must be positive, got {n}")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must lie in [0,1], got {q}")
    rng = seed.stream(GRAPH_STREAM)
    m = n * (n - 1) // 2
    return _graph_from_pair_draws(n, rng.random(m) < q)


def sample_planted(params: ModelParams, seed: Seed) -> Tuple[Graph, PlantedSets]:
    """PDBS sample: planted pairs with probability p, all other pairs with probability q."""
    rng = seed.stream(GRAPH_STREAM)
    planted = _draw_planted_sets(params, rng)
    mask = _planted_pair_mask(params.n, planted)
    probs = np.where(mask, params.p, params.q)
    present = rng.random(mask.size) < probs
    return _graph_from_pair_draws(params.n, present), planted


def union_probability(p: float, q: float) -> float:
    """p' = (p - q) / (1 - q), so that 1 - (1-q)(1-p') = p."""
    if not 0.0 <= q < 1.0:
        raise ParameterError(f"q must lie in [0,1), got {q}")
    return (p - q) / (1.0 - q)


def sample_planted_union(params: ModelParams, seed: Seed) -> Tuple[Graph, PlantedSets]:
    """
    Same law as sample_planted, built as G(n,q) OR K^{p'}_{R,L}.

    The base graph ignores the planted sets; the planted block is then overlaid
    with independent Bernoulli(p') edges.
    """
    rng = seed.stream(GRAPH_STREAM)
    planted = _draw_planted_sets(params, rng)
    mask = _planted_pair_mask(params.n, planted)
    present = rng.random(mask.size) < params.q
    p_prime = union_probability(params.p, params.q)
    planted_idx = np.flatnonzero(mask)
    present[planted_idx] |= rng.random(planted_idx.size) < p_prime
    return _graph_from_pair_draws(params.n, present), planted
