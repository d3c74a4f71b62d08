"""
Exact statistical quantities at desk scale.

- likelihood_ratio:       L_n(G) averaged over every placement, from the block-sum histogram
- second_moment_exact:    E_H0[L_n^2] through the nested hypergeometric law of the overlap
- second_moment_bruteforce: the same quantity by enumerating placement pairs
- bayes_risk_exact:       1 - TV(P_H0, P_H1) by enumerating every graph
- risk_lower_bound:       1 - sqrt(E_H0[L_n^2] - 1) / 2

The per-pair likelihood ratio is the Bernoulli one,
    f(A_ij) = (p/q)^A_ij * ((1-p)/(1-q))^(1-A_ij),
so that E_H0[f] = 1 and E_H0[f^2] = 1 + chi2(p||q).
All probability work is done in log space.
"""

import logging
import math
from collections import Counter
from typing import Dict, List, Optional, Union

import numpy as np
from scipy.special import logsumexp, xlogy

from pdbs.config import settings
from pdbs.errors import NormalizationError, ParameterError
from pdbs.engine.detectors import block_sum_histogram
from pdbs.engine.measures import chi2_bernoulli
from pdbs.graph.graph import Graph, pair_index
from pdbs.graph.placements import check_budget, iter_placements, placement_masks
from pdbs.models.canonical import ExactRisk, ModelParams, SecondMoment, SecondMomentMethod
from pdbs.workers.pool import parallel_map

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-10
PAIR_CHUNK = 256        # placements per brute-force partition
GRAPH_CHUNK = 1 << 12   # graphs per enumeration partition


def saturating_exp(x: float) -> float:
    """exp(x), or inf once x is past the float range."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log_count(counts: List[int]) -> np.ndarray:
    return np.array([math.log(c) if c > 0 else -np.inf for c in counts])


def _signal(params: ModelParams, lam: Optional[float]) -> float:
    if lam is None:
        return chi2_bernoulli(params.p, params.q)
    if lam < 0:
        raise ParameterError(f"lambda must be non-negative, got {lam}")
    return float(lam)


# ---------- Likelihood ratio ----------


def log_likelihood_ratio(graph: Graph, params: ModelParams, cap: Optional[int] = None, threads: int = 1) -> float:
    """log L_n(G); -inf when every placement is ruled out (p = 1 with a missing planted edge)."""
    if graph.n != params.n:
        raise ParameterError(f"graph has {graph.n} vertices but params.n = {params.n}")
    hist = block_sum_histogram(graph, params.k_r, params.k_l, cap=cap, threads=threads)
    kk = params.planted_edge_count
    s = np.arange(kk + 1)
    log_terms = (
        _log_count(hist)
        + xlogy(s, params.p / params.q)
        + xlogy(kk - s, (1.0 - params.p) / (1.0 - params.q))
    )
    if np.all(np.isneginf(log_terms)):
        return -math.inf
    return float(logsumexp(log_terms)) - math.log(params.placement_count)


def likelihood_ratio(graph: Graph, params: ModelParams, cap: Optional[int] = None, threads: int = 1) -> float:
    """
    L_n(G) = E_K[P_H1(G | K) / P_H0(G)] over the uniform prior on ordered placements.

    Raises:
        BudgetExceeded: when the placement count exceeds cap (default enum_cap)
    """
    return saturating_exp(log_likelihood_ratio(graph, params, cap=cap, threads=threads))


# ---------- Second moment ----------


def overlap_histogram(params: ModelParams) -> Dict[int, int]:
    """
    Number of placements K' with |E(K ∩ K')| = s, for a fixed placement K.

    R' takes a vertices from R, d from L and the rest from outside; L' then takes
    c from R \\ R', b from L \\ R' and the rest from what remains. The shared
    edges number ab + cd.
    """
    n, k_r, k_l = params.n, params.k_r, params.k_l
    outside = n - k_r - k_l
    hist: Counter = Counter()
    for a in range(k_r + 1):
        for d in range(min(k_l, k_r - a) + 1):
            e = k_r - a - d
            w1 = math.comb(k_r, a) * math.comb(k_l, d) * math.comb(outside, e)
            if w1 == 0:
                continue
            for c in range(min(k_r - a, k_l) + 1):
                for b in range(min(k_l - d, k_l - c) + 1):
                    w2 = math.comb(k_r - a, c) * math.comb(k_l - d, b) * math.comb(outside - e, k_l - c - b)
                    if w2:
                        hist[a * b + c * d] += w1 * w2

    total = sum(hist.values())
    if total != params.placement_count:
        raise NormalizationError(f"overlap weights sum to {total}, expected {params.placement_count}")
    return dict(sorted(hist.items()))


def _moment_from_histogram(hist: Dict[int, int], total: int, lam: float, method: SecondMomentMethod) -> SecondMoment:
    shared = np.array(list(hist.keys()), dtype=float)
    log_value = float(logsumexp(_log_count(list(hist.values())) + shared * math.log1p(lam))) - math.log(total)
    value = saturating_exp(log_value)
    return SecondMoment(value=value, log_value=log_value, method=method)


def second_moment_exact(params: ModelParams, lam: Optional[float] = None) -> SecondMoment:
    """E_H0[L_n^2] = E[(1 + lambda)^{|E(K ∩ K')|}], lambda = chi2(p||q) unless given."""
    lam = _signal(params, lam)
    return _moment_from_histogram(
        overlap_histogram(params), params.placement_count, lam, SecondMomentMethod.CLOSED_FORM_SUM
    )


def second_moment_bruteforce(
    params: ModelParams,
    cap: Optional[int] = None,
    lam: Optional[float] = None,
    threads: int = 1,
) -> SecondMoment:
    """
    Average of (1 + lambda)^{|E(K ∩ K')|} over every ordered pair of placements.

    Raises:
        BudgetExceeded: when placements^2 exceeds cap (default pair_cap)
    """
    lam = _signal(params, lam)
    cap = settings.pair_cap if cap is None else cap
    total = params.placement_count
    check_budget("second_moment_bruteforce", total * total, cap)
    if params.n > 64:
        raise ParameterError(f"brute-force second moment supports n <= 64, got {params.n}")

    rights, lefts = placement_masks(params.n, params.k_r, params.k_l)
    r_all = np.array(rights, dtype=np.uint64)
    l_all = np.array(lefts, dtype=np.uint64)
    size = params.planted_edge_count + 1

    def partial(start: int) -> np.ndarray:
        stop = min(start + PAIR_CHUNK, total)
        r = r_all[start:stop, None]
        l = l_all[start:stop, None]
        a = np.bitwise_count(r & r_all).astype(np.int64)
        b = np.bitwise_count(l & l_all).astype(np.int64)
        c = np.bitwise_count(r & l_all).astype(np.int64)
        d = np.bitwise_count(l & r_all).astype(np.int64)
        return np.bincount((a * b + c * d).ravel(), minlength=size)

    parts = parallel_map(partial, range(0, total, PAIR_CHUNK), threads)
    counts = np.sum(parts, axis=0)
    hist = {s: int(c) for s, c in enumerate(counts) if c}
    return _moment_from_histogram(hist, total * total, lam, SecondMomentMethod.BRUTE_FORCE)


# ---------- Bayes risk ----------


def _unique_planted_masks(params: ModelParams) -> Counter:
    """Planted-pair masks over the canonical pair order, with multiplicity."""
    n = params.n
    masks: Counter = Counter()
    for right, left in iter_placements(n, params.k_r, params.k_l):
        mask = 0
        for r in right:
            for l in left:
                mask |= 1 << pair_index(n, r, l)
        masks[mask] += 1
    return masks


def bayes_risk_exact(
    params: ModelParams,
    cap: Optional[int] = None,
    max_pairs: Optional[int] = None,
    threads: int = 1,
) -> ExactRisk:
    """
    Optimal risk 1 - TV(P_H0, P_H1) by enumerating all 2^C(n,2) graphs.

    Graphs are integer masks over the canonical pair order; enumeration runs in
    fixed-size index ranges whose partial sums are combined with math.fsum.

    Raises:
        BudgetExceeded: C(n,2) above max_pairs or placements above cap
        NormalizationError: either law fails to sum to one within 1e-10
    """
    max_pairs = settings.graph_enum_max_pairs if max_pairs is None else max_pairs
    cap = settings.enum_cap if cap is None else cap
    m = math.comb(params.n, 2)
    check_budget("bayes_risk_exact", 1 << m, 1 << max_pairs)
    check_budget("bayes_risk_exact", params.placement_count, cap)

    p, q = params.p, params.q
    kk = params.planted_edge_count
    grouped = _unique_planted_masks(params)
    masks = np.array(list(grouped.keys()), dtype=np.uint64)
    log_w = np.log(np.array(list(grouped.values()), dtype=float) / params.placement_count)

    def partial(start: int):
        stop = min(start + GRAPH_CHUNK, 1 << m)
        graphs = np.arange(start, stop, dtype=np.uint64)
        e = np.bitwise_count(graphs).astype(float)
        log_p0 = xlogy(e, q) + xlogy(m - e, 1.0 - q)
        s = np.bitwise_count(graphs[:, None] & masks[None, :]).astype(float)
        log_cond = xlogy(s, p) + xlogy(kk - s, 1.0 - p) + xlogy(e[:, None] - s, q) + xlogy(m - kk - e[:, None] + s, 1.0 - q)
        log_p1 = logsumexp(log_cond + log_w[None, :], axis=1)
        p0 = np.exp(log_p0)
        p1 = np.exp(log_p1)
        return float(p0.sum()), float(p1.sum()), float(np.abs(p1 - p0).sum())

    parts = parallel_map(partial, range(0, 1 << m, GRAPH_CHUNK), threads)
    total0 = math.fsum(x[0] for x in parts)
    total1 = math.fsum(x[1] for x in parts)
    for name, total in (("P_H0", total0), ("P_H1", total1)):
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(f"{name} sums to {total!r} over all graphs")

    tv = min(1.0, max(0.0, 0.5 * math.fsum(x[2] for x in parts)))
    logger.debug(f"bayes_risk_exact: n={params.n} graphs={1 << m} tv={tv}")
    return ExactRisk(bayes_risk=1.0 - tv, tv=tv)


def risk_lower_bound(m2: Union[SecondMoment, float]) -> float:
    """max(0, 1 - sqrt(m2 - 1) / 2)."""
    value = m2.value if isinstance(m2, SecondMoment) else float(m2)
    if value < 1.0 - 1e-12:
        raise ParameterError(f"second moment must be at least 1, got {value}")
    return max(0.0, 1.0 - 0.5 * math.sqrt(max(value - 1.0, 0.0)))
